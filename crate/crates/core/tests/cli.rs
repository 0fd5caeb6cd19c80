use std::io::Write;
use std::process::{Command, Output};

use reopt::cli::{
    homogeneous_pricers, selftest, write_selftest, OutputFormat, PriceReport, PricerFn,
};
use reopt::pricer::{self, Algorithm, PriceResult};
use reopt::{ExpiryLaw, MarketParams, MoveFactors, Payoff};

fn reopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reopt"))
        .args(args)
        .env_remove("REOPT_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_column(text: &str, payoff: &str) -> Vec<f64> {
    text.lines()
        .skip(1)
        .filter(|l| l.split(',').nth(1) == Some(payoff))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn default_price_runs_every_admissible_algorithm() {
    let o = reopt(&["price"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("algo,value,nodes_touched,status\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().filter(|l| l.ends_with(",ok")).count(), 3);
    assert!(text.contains("tri,,,skipped"));
    let d: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("max_discrepancy,"))
        .unwrap()
        .trim_end_matches(',')
        .parse()
        .unwrap();
    assert!(d < 1e-9);
}

#[test]
fn all_four_agree_within_the_trinomial_guard() {
    let o = reopt(&["price", "--steps", "12", "--algo", "all"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with(",ok")).count(), 4);
}

#[test]
fn zero_strike_call_without_dividends_prices_at_spot() {
    let o = reopt(&[
        "price", "--payoff", "zsc", "--div", "0", "--spot", "87", "--algo", "reco",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    assert_eq!(line, "reco,87,231,ok");
}

#[test]
fn intensity_must_keep_middle_probability_below_one() {
    let o = reopt(&[
        "price",
        "--lambda",
        "25",
        "--steps",
        "20",
        "--maturity",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("λ·Δt must be < 1"));
}

#[test]
fn guard_exits_three_and_names_the_guard() {
    let o = reopt(&["price", "--algo", "tri", "--steps", "20"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("tri guard"));
    let o = reopt(&["price", "--algo", "enum", "--steps", "9"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        reopt(&["price", "--payoff", "digital"]).status.code(),
        Some(2)
    );
    assert_eq!(
        reopt(&["price", "--lambda", "0.1", "--exp-atom", "0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(reopt(&["price", "--sigma", "-1"]).status.code(), Some(2));
    assert_eq!(reopt(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(reopt(&["--help"]).status.code(), Some(0));
}

#[test]
fn json_round_trips_and_reprices_identically() {
    let o = reopt(&[
        "price", "--steps", "9", "--payoff", "put", "--output", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: PriceReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.results.len(), 4);
    let again = report.config.price().unwrap();
    for (a, b) in report.results.iter().zip(&again.results) {
        assert_eq!(a.algo, b.algo);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}

#[test]
fn pmf_file_sets_the_expiry_law() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, r#"{{"pmf":[0.25,0.25,0.5]}}"#).unwrap();
    let path = file.path().to_str().unwrap();
    let o = reopt(&[
        "price",
        "--steps",
        "2",
        "--pmf-file",
        path,
        "--payoff",
        "zsc",
        "--div",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("reco,100,"));

    let o = reopt(&["price", "--steps", "3", "--pmf-file", path]);
    assert_eq!(o.status.code(), Some(2));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, r#"{{"pmf":[0.5,0.6]}}"#).unwrap();
    let o = reopt(&[
        "price",
        "--steps",
        "1",
        "--pmf-file",
        bad.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn steps_sweep_keeps_zero_strike_call_flat_without_dividends() {
    let o = reopt(&[
        "sweep", "--param", "steps", "--from", "1", "--to", "50", "--div", "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("param_value,payoff,price\n"));
    let zsc = csv_column(&text, "zsc");
    assert_eq!(zsc.len(), 50);
    assert!(zsc.iter().all(|v| (v - 100.0).abs() < 1e-9));
    assert_eq!(text.lines().nth(1).unwrap().split(',').next(), Some("1"));
}

#[test]
fn lambda_sweep_orderings() {
    let o = reopt(&[
        "sweep", "--param", "lambda", "--from", "0.01", "--to", "2", "--points", "40",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let nonincreasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    assert!(nonincreasing(&csv_column(&text, "call")));
    assert!(nonincreasing(&csv_column(&text, "put")));
    assert!(csv_column(&text, "zsc")
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-9));
}

#[test]
fn spot_sweep_orderings() {
    let o = reopt(&[
        "sweep", "--param", "spot", "--from", "50", "--to", "150", "--points", "41",
    ]);
    let text = stdout(&o);
    assert!(csv_column(&text, "call").windows(2).all(|w| w[1] >= w[0]));
    assert!(csv_column(&text, "put").windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn selftest_is_deterministic_and_honours_the_env_seed() {
    let a = reopt(&["selftest", "--cases", "10", "--seed", "42"]);
    let b = reopt(&["selftest", "--cases", "10", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("10/10 consistent"));
    let env = Command::new(env!("CARGO_BIN_EXE_reopt"))
        .args(["selftest", "--cases", "10"])
        .env("REOPT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}

#[test]
fn range_lists_every_horizon() {
    let o = reopt(&["range", "--steps", "4", "--payoff", "zsc"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("per_k,")).count(), 5);
    assert!(text.contains("high,,100\n"));
}

#[test]
fn converge_and_bench_emit_their_columns() {
    let o = reopt(&["converge", "--paths", "2000", "--steps-list", "8,16"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("n,tree_price,mc_mean,mc_se,abs_diff\n"));
    assert_eq!(text.lines().count(), 3);

    let o = reopt(&["converge", "--paths", "100", "--payoff", "logcontract"]);
    assert_eq!(o.status.code(), Some(2));

    let o = reopt(&["bench", "--n-to", "3", "--reps", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n_steps,algo,mean_ns,reps,nodes_touched\n"));
    assert_eq!(text.lines().count(), 10);
}

fn flipped_recombining(
    p: &MarketParams,
    f: &MoveFactors,
    l: &ExpiryLaw,
    payoff: &Payoff,
) -> reopt::Result<PriceResult> {
    let mut r = pricer::price_recombining(p, f, l, payoff)?;
    r.value = -r.value;
    Ok(r)
}

#[test]
fn corrupted_pricer_fails_the_selftest_by_name() {
    let mut pricers = homogeneous_pricers();
    pricers[2] = (Algorithm::Recombining, flipped_recombining as PricerFn);
    let report = selftest(20, 3, &pricers);
    let mut out = Vec::new();
    let code = write_selftest(&report, OutputFormat::Csv, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(code, 1);
    assert!(text.contains("divergent [reco]"), "{text}");
    assert!(text.lines().last() == Some("FAIL"));
}
