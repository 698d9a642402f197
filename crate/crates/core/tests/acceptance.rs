use std::process::ExitCode;
use tacnode_pearcey::acceptance::{criterion, TITLES};

fn main() -> ExitCode {
    let mut failed = 0;
    for id in 1..=TITLES.len() {
        match criterion(id) {
            Ok(c) if c.pass() => println!("criterion {id} ({}): PASS", c.title),
            Ok(c) => {
                failed += 1;
                let why: Vec<String> = c.failures().map(|f| f.to_string()).collect();
                println!("criterion {id} ({}): FAIL {}", c.title, why.join("; "));
            }
            Err(e) => {
                failed += 1;
                println!("criterion {id} ({}): FAIL error: {e}", TITLES[id - 1]);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
