use super::*;
use crate::expiry::{geometric_law, law_from_hazards};
use crate::model::{make_factors, FactorStyle, Move};

/// N = 1, S0 = 100, r = y = 0, u = 1.25, d = 0.8.
fn one_period() -> (MarketParams, MoveFactors) {
    let params = MarketParams::new(100.0, 0.0, 0.0, 1.25f64.ln(), 1.0, 1).unwrap();
    let factors = make_factors(&params, FactorStyle::Exponential).unwrap();
    (params, factors)
}

fn defaults(steps: usize) -> (MarketParams, MoveFactors, ExpiryLaw) {
    let params = MarketParams::default().with_steps(steps);
    let factors = make_factors(&params, FactorStyle::Exponential).unwrap();
    let law = ExpiryLaw::from_intensity(0.1, params.dt(), steps).unwrap();
    (params, factors, law)
}

/// Closed-form CRR price: `e^{-rT} Σ C(N,i) p^i (1-p)^{N-i} f(S u^i d^{N-i})`.
fn crr_oracle(params: &MarketParams, f: &MoveFactors, payoff: &Payoff) -> f64 {
    let n = params.steps;
    let p = (f.mid - f.down) / (f.up - f.down);
    let mut total = 0.0;
    let mut binom = 1.0;
    for i in 0..=n {
        if i > 0 {
            binom *= (n - i + 1) as f64 / i as f64;
        }
        let s = params.spot * f.up.powi(i as i32) * f.down.powi((n - i) as i32);
        total +=
            binom * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32) * payoff.evaluate(s).unwrap();
    }
    (-params.rate * params.maturity).exp() * total
}

#[test]
fn one_period_hand_values() {
    let (params, factors) = one_period();
    let law = law_from_hazards(&[0.1]).unwrap();
    let call = Payoff::call(100.0).unwrap();
    let put = Payoff::put(100.0).unwrap();
    for algo in Algorithm::HOMOGENEOUS {
        let c = price(algo, &params, &factors, &law, &call).unwrap();
        assert!((c.value - 10.0).abs() < 1e-12, "{algo}: {}", c.value);
        let p = price(algo, &params, &factors, &law, &put).unwrap();
        assert!((p.value - 10.0).abs() < 1e-12, "{algo}: {}", p.value);
    }
    let (res, paths) = price_path_enumeration(&params, &factors, &law, &call).unwrap();
    assert!((res.value - 10.0).abs() < 1e-12);
    let probs: Vec<f64> = paths.iter().map(|p| p.probability).collect();
    // down, mid, up
    for (a, b) in probs.iter().zip([0.5, 0.1, 0.4]) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(paths[1].expiry_period, 0);
    assert_eq!(paths[1].discounted_payoff, 0.0);
    assert_eq!(paths[2].expiry_period, 1);
    assert!((paths[2].discounted_payoff - 25.0).abs() < 1e-12);
}

#[test]
fn zsc_without_dividends_is_spot() {
    let params = MarketParams::new(87.0, 0.07, 0.0, 0.25, 2.0, 9).unwrap();
    let factors = make_factors(&params, FactorStyle::Exponential).unwrap();
    let law = law_from_hazards(&[0.05, 0.3, 0.0, 0.12, 0.5, 0.2, 0.01, 0.9, 0.4]).unwrap();
    for algo in Algorithm::HOMOGENEOUS {
        let v = price(algo, &params, &factors, &law, &Payoff::ZeroStrikeCall).unwrap();
        assert!((v.value - 87.0).abs() < 1e-10, "{algo}: {}", v.value);
    }
    assert_eq!(price_zsc_closed_form(&params, &law).unwrap(), 87.0);
}

#[test]
fn conditioning_sum_zsc_matches_mgf() {
    let (params, factors, law) = defaults(20);
    let sum = price_conditioning_sum(&params, &factors, &law, &Payoff::ZeroStrikeCall).unwrap();
    let direct: f64 = law
        .pmf()
        .iter()
        .enumerate()
        .map(|(k, p)| 100.0 * p * (-0.05 * k as f64 / 20.0).exp())
        .sum();
    assert!((sum.value - direct).abs() < 1e-10);
    let closed = price_zsc_closed_form(&params, &law).unwrap();
    assert!((closed - direct).abs() < 1e-12);
    let reco = price_recombining(&params, &factors, &law, &Payoff::ZeroStrikeCall).unwrap();
    assert!((reco.value - closed).abs() < 1e-10);
}

#[test]
fn zero_hazard_collapses_to_crr() {
    let (params, factors, _) = defaults(10);
    let law = ExpiryLaw::fixed(10).unwrap();
    for payoff in Payoff::standard_set(100.0) {
        let want = crr_oracle(&params, &factors, &payoff);
        for algo in Algorithm::HOMOGENEOUS {
            let got = price(algo, &params, &factors, &law, &payoff).unwrap().value;
            assert!(
                (got - want).abs() < 1e-10,
                "{algo} {}: {got} vs {want}",
                payoff.name()
            );
        }
        let general = price_general_tree(&params, &factors, &|_, _| 0.0, &payoff).unwrap();
        assert!((general.value - want).abs() < 1e-10);
    }
}

#[test]
fn point_mass_at_maturity_is_discounted_crr() {
    let (params, factors, _) = defaults(7);
    let law = ExpiryLaw::fixed(7).unwrap();
    let call = Payoff::call(100.0).unwrap();
    let v = price_conditioning_sum(&params, &factors, &law, &call).unwrap();
    assert!((v.value - crr_oracle(&params, &factors, &call)).abs() < 1e-12);
}

#[test]
fn six_step_put_matches_enumeration() {
    let (params, factors, law) = defaults(6);
    let put = Payoff::put(100.0).unwrap();
    let (oracle, paths) = price_path_enumeration(&params, &factors, &law, &put).unwrap();
    assert_eq!(paths.len(), 729);
    let total: f64 = paths.iter().map(|p| p.probability).sum();
    assert!((total - 1.0).abs() < 1e-10);
    for algo in Algorithm::HOMOGENEOUS {
        let v = price(algo, &params, &factors, &law, &put).unwrap().value;
        assert!(
            (v - oracle.value).abs() < 1e-12,
            "{algo}: {v} vs {}",
            oracle.value
        );
    }
}

#[test]
fn two_step_expiry_marginal_is_geometric() {
    let params = MarketParams::default().with_steps(2);
    let factors = make_factors(&params, FactorStyle::Exponential).unwrap();
    let p = 0.3;
    let law = geometric_law(p, 2).unwrap();
    let (_, paths) =
        price_path_enumeration(&params, &factors, &law, &Payoff::ZeroStrikeCall).unwrap();
    let mut marginal = [0.0; 3];
    for r in &paths {
        marginal[r.expiry_period] += r.probability;
        let first_mid = r.moves.iter().position(|m| *m == Move::Mid).unwrap_or(2);
        assert_eq!(first_mid, r.expiry_period);
    }
    for (a, b) in marginal
        .iter()
        .zip([p, p * (1.0 - p), (1.0 - p) * (1.0 - p)])
    {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn node_counts() {
    for n in 1..=10usize {
        let (params, factors, law) = defaults(n);
        let call = Payoff::call(100.0).unwrap();
        let tri = price_trinomial(&params, &factors, &law, &call).unwrap();
        assert_eq!(tri.nodes_touched, (3u64.pow(n as u32 + 1) - 1) / 2);
        let rec = price_recursive_binomial(&params, &factors, &law, &call).unwrap();
        assert_eq!(rec.nodes_touched, 3 * 2u64.pow(n as u32) - 2);
        let reco = price_recombining(&params, &factors, &law, &call).unwrap();
        assert_eq!(reco.nodes_touched, (n * (n + 3) / 2 + 1) as u64);
    }
}

#[test]
fn guards() {
    let (params, factors, _) = defaults(17);
    let law = ExpiryLaw::from_intensity(0.1, params.dt(), 17).unwrap();
    let call = Payoff::call(100.0).unwrap();
    assert_eq!(
        price_trinomial(&params, &factors, &law, &call).unwrap_err(),
        Error::TooLarge {
            algo: "tri",
            steps: 17,
            max: 16
        }
    );
    let (p9, f9, l9) = defaults(9);
    assert!(matches!(
        price_path_enumeration(&p9, &f9, &l9, &call),
        Err(Error::TooLarge { algo: "enum", .. })
    ));
    let (p26, f26, l26) = defaults(26);
    assert!(matches!(
        price_recursive_binomial(&p26, &f26, &l26, &call),
        Err(Error::TooLarge { .. })
    ));
    let (p21, f21, _) = defaults(21);
    assert!(matches!(
        price_general_tree(&p21, &f21, &|_, _| 0.1, &call),
        Err(Error::TooLarge { .. })
    ));
}

#[test]
fn law_length_must_match_tree() {
    let (params, factors, _) = defaults(5);
    let law = ExpiryLaw::fixed(4).unwrap();
    let call = Payoff::call(100.0).unwrap();
    for algo in Algorithm::HOMOGENEOUS {
        assert!(matches!(
            price(algo, &params, &factors, &law, &call),
            Err(Error::InvalidLaw(_))
        ));
    }
}

#[test]
fn certain_expiry_before_maturity() {
    // All mass at period 3 of 6: a 3-step fixed-expiry option.
    let (params, factors, _) = defaults(6);
    let law = ExpiryLaw::new(vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
    let put = Payoff::put(100.0).unwrap();
    let want = fixed_expiry_price(params.spot, &factors, 3, &put).unwrap();
    for algo in Algorithm::HOMOGENEOUS {
        let v = price(algo, &params, &factors, &law, &put).unwrap().value;
        assert!((v - want).abs() < 1e-12, "{algo}: {v} vs {want}");
    }
}

#[test]
fn general_tree_constant_hazard_is_homogeneous() {
    let (params, factors, _) = defaults(12);
    let p = 0.08;
    let law = geometric_law(p, 12).unwrap();
    for payoff in Payoff::standard_set(100.0) {
        let g = price_general_tree(&params, &factors, &|_, _| p, &payoff)
            .unwrap()
            .value;
        let r = price_recursive_binomial(&params, &factors, &law, &payoff)
            .unwrap()
            .value;
        let c = price_recombining(&params, &factors, &law, &payoff)
            .unwrap()
            .value;
        assert!((g - r).abs() < 1e-12);
        assert!((g - c).abs() < 1e-12);
    }
}

/// 3^N enumeration where each node's probabilities follow its own up/down
/// history; moves after expiry get an arbitrary but normalised law.
fn general_enumeration(
    params: &MarketParams,
    f: &MoveFactors,
    hazard: &dyn Fn(usize, &[Move]) -> f64,
    payoff: &Payoff,
) -> (f64, f64) {
    let n = params.steps;
    let pu = (f.mid - f.down) / (f.up - f.down);
    let (mut price, mut mass) = (0.0, 0.0);
    for code in 0..3usize.pow(n as u32) {
        let mut digits = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            digits.push(c % 3);
            c /= 3;
        }
        digits.reverse();
        let (mut s, mut prob) = (params.spot, 1.0);
        let mut hist: Vec<Move> = Vec::new();
        let mut paid = None;
        for (k, d) in digits.iter().enumerate() {
            if paid.is_some() {
                prob /= 3.0;
                continue;
            }
            let h = hazard(k, &hist);
            match d {
                0 => {
                    prob *= (1.0 - pu) * (1.0 - h);
                    s *= f.down;
                    hist.push(Move::Down);
                }
                1 => {
                    prob *= h;
                    paid =
                        Some((-params.rate * k as f64 * f.dt).exp() * payoff.evaluate(s).unwrap());
                }
                _ => {
                    prob *= pu * (1.0 - h);
                    s *= f.up;
                    hist.push(Move::Up);
                }
            }
        }
        let v = paid.unwrap_or_else(|| {
            (-params.rate * params.maturity).exp() * payoff.evaluate(s).unwrap()
        });
        price += prob * v;
        mass += prob;
    }
    (price, mass)
}

#[test]
fn general_tree_matches_path_dependent_enumeration() {
    let (params, factors, _) = defaults(5);
    let hazard = |_: usize, path: &[Move]| {
        if path.last() == Some(&Move::Up) {
            0.3
        } else {
            0.05
        }
    };
    for payoff in Payoff::standard_set(100.0) {
        let (want, mass) = general_enumeration(&params, &factors, &hazard, &payoff);
        assert!((mass - 1.0).abs() < 1e-12);
        let got = price_general_tree(&params, &factors, &hazard, &payoff)
            .unwrap()
            .value;
        assert!(
            (got - want).abs() < 1e-12,
            "{}: {got} vs {want}",
            payoff.name()
        );
    }
}

#[test]
fn range_zsc_without_dividend_is_degenerate() {
    let params = MarketParams::new(100.0, 0.08, 0.0, 0.3, 1.0, 12).unwrap();
    let factors = make_factors(&params, FactorStyle::Exponential).unwrap();
    let r = price_range(&params, &factors, &Payoff::ZeroStrikeCall).unwrap();
    assert!(r.degenerate);
    assert_eq!(r.per_k_prices.len(), 13);
    assert!(r.per_k_prices.iter().all(|v| (v - 100.0).abs() < 1e-12));
}

#[test]
fn range_zsc_with_dividend_is_monotone() {
    let (params, factors, _) = defaults(20);
    let r = price_range(&params, &factors, &Payoff::ZeroStrikeCall).unwrap();
    assert!(!r.degenerate);
    for (k, v) in r.per_k_prices.iter().enumerate() {
        assert!((v - 100.0 * (-0.05 * k as f64 * 0.05).exp()).abs() < 1e-12);
    }
    assert!(r.per_k_prices.windows(2).all(|w| w[1] < w[0]));
    assert!((r.low - 100.0 * (-0.05f64).exp()).abs() < 1e-12);
    assert_eq!(r.high, 100.0);
}

#[test]
fn general_dispatch_matches_recombining() {
    let (params, factors, law) = defaults(9);
    let put = Payoff::put(100.0).unwrap();
    let g = price(Algorithm::GeneralTree, &params, &factors, &law, &put).unwrap();
    let r = price_recombining(&params, &factors, &law, &put).unwrap();
    assert!((g.value - r.value).abs() < 1e-12);
}
