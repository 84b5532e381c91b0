//! Acceptance suite: runs `reclab selftest --seed 0` twice as separate
//! processes and prints one PASS/FAIL line per criterion. Criterion 12 also
//! requires the two processes' outputs to match byte for byte.

use std::process::{Command, ExitCode};

fn selftest() -> (i32, Vec<u8>) {
    let out =
        Command::new(env!("CARGO_BIN_EXE_reclab")).args(["selftest", "--seed", "0"]).output().expect("spawn reclab");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn main() -> ExitCode {
    let (code_a, first) = selftest();
    let (code_b, second) = selftest();
    let text = String::from_utf8_lossy(&first);
    let identical = first == second;
    let mut lines: Vec<String> = text.lines().filter(|l| l.starts_with("criterion ")).map(str::to_owned).collect();
    if let Some(last) = lines.iter_mut().find(|l| l.starts_with("criterion 12 ")) {
        last.push_str(if identical { ", two processes identical" } else { ", two processes differ" });
        if !identical {
            *last = last.replacen(" PASS ", " FAIL ", 1);
        }
    }
    for l in &lines {
        println!("{l}");
    }
    let passed = lines.iter().filter(|l| l.contains(" PASS ")).count();
    let ok = lines.len() == 12 && passed == 12 && code_a == 0 && code_b == 0 && identical;
    println!("acceptance: {passed}/{} criteria passed (selftest exit codes {code_a}, {code_b})", lines.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
