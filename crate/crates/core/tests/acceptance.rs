//! The acceptance battery: seeds 1..=50, one line per criterion, non-zero
//! exit when any criterion fails. Runs without the libtest harness so the
//! lines are always printed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use autobid_market::suite::{check_crossed_pair, check_dynamics, run_suite, SuiteReport};
use rayon::prelude::*;

const SEEDS: std::ops::RangeInclusive<u64> = 1..=50;

struct Line {
    criterion: u8,
    pass: bool,
    detail: String,
}

fn criterion_line(report: &SuiteReport, criterion: u8) -> Line {
    let checks: Vec<_> = report.checks.iter().filter(|c| c.criterion == criterion).collect();
    let detail = checks
        .iter()
        .map(|c| {
            let mut s = format!("{} worst {:.3e} {} {:.1e} over {}", c.name, c.worst, c.sense, c.bound, c.instances);
            if !c.pass {
                s.push_str(&format!(" [{}]", c.failure));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ");
    Line {
        criterion,
        pass: report.criterion_passes(criterion),
        detail,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let began = Instant::now();
    let out = f();
    (out, began.elapsed())
}

fn suite_outputs(bin: &Path, dir: &Path, tag: &str) -> Result<Vec<Vec<u8>>, String> {
    let summary = dir.join(format!("{tag}-summary.csv"));
    let records = dir.join(format!("{tag}-records.csv"));
    let out = Command::new(bin)
        .args(["suite", "--seeds", "1..10", "--out"])
        .arg(&summary)
        .arg("--records")
        .arg(&records)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("suite exited with {}", out.status));
    }
    let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
    Ok(vec![out.stdout, read(&summary)?, read(&records)?])
}

fn determinism() -> Line {
    let bin = Path::new(env!("CARGO_BIN_EXE_autobid"));
    let result = (|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = suite_outputs(bin, dir.path(), "first")?;
        let second = suite_outputs(bin, dir.path(), "second")?;
        Ok::<_, String>((first == second, first.iter().map(Vec::len).sum::<usize>()))
    })();
    match result {
        Ok((same, bytes)) => Line {
            criterion: 13,
            pass: same,
            detail: format!("two runs of `suite --seeds 1..10`, {bytes} bytes each, identical: {same}"),
        },
        Err(e) => Line {
            criterion: 13,
            pass: false,
            detail: e,
        },
    }
}

fn main() {
    let seeds: Vec<u64> = SEEDS.collect();

    let (crossed, crossed_time) = timed(check_crossed_pair);
    let (dynamics, dynamics_time) = timed(|| seeds.par_iter().flat_map(|&s| check_dynamics(s)).collect::<Vec<_>>());
    let report = run_suite(&seeds);

    let mut lines: Vec<Line> = (1..=12).map(|c| criterion_line(&report, c)).collect();
    let crossed_ok = crossed.iter().all(|r| r.pass) && crossed_time < Duration::from_secs(1);
    lines[0].pass &= crossed_ok;
    lines[0].detail.push_str(&format!("; runtime {crossed_time:.2?} < 1s"));
    let dynamics_ok = dynamics.iter().all(|r| r.pass) && dynamics_time < Duration::from_secs(120);
    lines[1].pass &= dynamics_ok;
    lines[1].detail.push_str(&format!("; runtime {dynamics_time:.2?} < 2min"));
    lines.push(determinism());

    for l in &lines {
        println!(
            "criterion {:>2}: {}  {}",
            l.criterion,
            if l.pass { "PASS" } else { "FAIL" },
            l.detail
        );
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("{} of {} criteria pass", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
