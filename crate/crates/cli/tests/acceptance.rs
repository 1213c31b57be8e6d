//! Acceptance gate for the command-line interface: determinism of seeded
//! reports and the documented exit-code contract.

use std::process::Command;

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_gscert"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().expect("no signal"), out.stdout)
}

fn criterion(name: &str, ok: bool, details: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: {details}");
    assert!(ok, "{name}: {details}");
}

#[test]
fn a11_cli_determinism_and_exit_codes() {
    let args = ["certify", "--catalog", "flat-bump-1d", "--seed", "7"];
    let (code_a, out_a) = run(&args);
    let (code_b, out_b) = run(&args);
    let identical = out_a == out_b && !out_a.is_empty();

    let (code_bad, _) = run(&["certify", "--field", "x1 +* x2", "--dim", "2", "--f", "0"]);
    let (code_inconclusive, _) = run(&["certify", "--catalog", "steep-power-1d"]);

    criterion(
        "A11 cli determinism and exit codes",
        identical && code_a == 0 && code_b == 0 && code_bad == 2 && code_inconclusive == 4,
        &format!(
            "repeated seeded certify byte-identical={identical} ({} bytes, exit {code_a}); \
             malformed expression exit {code_bad} (want 2); \
             inconclusive certify exit {code_inconclusive} (want 4)",
            out_a.len()
        ),
    );
}
