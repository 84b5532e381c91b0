use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use reclab::characterize::{
    residual, scan, Evaluation, GridSpec, IdentityCase, IdentityId, Params, Point, QuadOrder, ScanOptions, Verdict,
};
use reclab::HazardModel;

fn exp1() -> HazardModel {
    HazardModel::exponential(1.0, 0.0).unwrap()
}

fn half() -> HazardModel {
    HazardModel::weibull(0.5, 1.0).unwrap()
}

fn weibull2() -> HazardModel {
    HazardModel::weibull(2.0, 1.0).unwrap()
}

fn run(id: IdentityId, params: Params, model: &HazardModel, tol: f64) -> reclab::characterize::ScanReport {
    scan(id, &params, model, &ScanOptions::new(model).tol(tol)).unwrap()
}

#[test]
fn weight_identities_separate_exponential_from_weibull_two() {
    for id in [IdentityId::AdjMean, IdentityId::Weights, IdentityId::Weights2] {
        for k in 1..=3 {
            let params = Params { k: Some(k), r: Some(k), ..Default::default() };
            assert_eq!(run(id, params, &exp1(), 1e-8).verdict, Verdict::Confirmed, "{id} k={k}");
            let bad = run(id, params, &weibull2(), 1e-8);
            assert_eq!(bad.verdict, Verdict::Violated, "{id}");
            assert!(bad.max_rel_residual >= 1e-2, "{id} {}", bad.max_rel_residual);
        }
    }
}

#[test]
fn three_point_identities_on_exponential() {
    for model in [exp1(), HazardModel::exponential(3.0, 0.5).unwrap()] {
        for k in 2..=4 {
            for r in 1..=3 {
                for p in [k + r, k + r + 2] {
                    let params = Params { k: Some(k), r: Some(r), p: Some(p), ..Default::default() };
                    let rep = run(IdentityId::Thm1, params, &model, 1e-8);
                    assert_eq!(rep.verdict, Verdict::Confirmed, "{model} k={k} r={r} p={p} {}", rep.max_rel_residual);
                    assert_eq!(rep.records.len(), 15);
                }
            }
        }
        for k in 1..=3 {
            for r in 1..=3 {
                let params = Params { k: Some(k), r: Some(r), ..Default::default() };
                assert_eq!(run(IdentityId::Cor1, params, &model, 1e-8).verdict, Verdict::Confirmed);
            }
        }
    }
    let params = Params { k: Some(2), r: Some(2), ..Default::default() };
    assert_eq!(run(IdentityId::Cor1, params, &half(), 1e-6).verdict, Verdict::Violated);
}

#[test]
fn yab_family_on_exponential() {
    let model = HazardModel::exponential(0.7, 0.0).unwrap();
    for p in 1..=6 {
        let params = Params { p: Some(p), ..Default::default() };
        assert_eq!(run(IdentityId::Bap05, params, &model, 1e-8).verdict, Verdict::Confirmed, "p={p}");
    }
    for k in 1..=4 {
        let params = Params { k: Some(k), p: Some(k + 2), ..Default::default() };
        assert_eq!(run(IdentityId::Yab08, params, &model, 1e-8).verdict, Verdict::Confirmed, "k={k}");
    }
    let params = Params { k: Some(2), p: Some(5), ..Default::default() };
    assert_eq!(run(IdentityId::Yab08, params, &weibull2(), 1e-6).verdict, Verdict::Violated);
}

#[test]
fn spacing_identities_hold_for_both_families_when_k_equals_r() {
    for model in [exp1(), half()] {
        for k in 1..=2 {
            for gap in 1..=2 {
                let params = Params::krmn(k, k, k + 1, k + 1 + gap);
                assert_eq!(run(IdentityId::Thm2, params, &model, 1e-8).verdict, Verdict::Confirmed, "{model}");
            }
        }
        assert_eq!(run(IdentityId::An, Params::default(), &model, 1e-8).verdict, Verdict::Confirmed);
    }
    // Unequal offsets: exponential only.
    let params = Params::krmn(1, 2, 2, 3);
    assert_eq!(run(IdentityId::Thm2, params, &exp1(), 1e-8).verdict, Verdict::Confirmed);
    assert_eq!(run(IdentityId::Thm2, params, &half(), 1e-8).verdict, Verdict::Violated);
}

#[test]
fn adjacent_spacing_with_printed_constant() {
    let params = Params { k: Some(1), r: Some(1), m: Some(2), ..Default::default() };
    assert_eq!(run(IdentityId::Cor2, params, &exp1(), 1e-8).verdict, Verdict::Confirmed);
    assert_eq!(run(IdentityId::Cor2, params, &half(), 1e-8).verdict, Verdict::Confirmed);
    // k + r > 2: the exponential value is (v - u)/(k + r + 1), not the printed one.
    let params = Params { k: Some(1), r: Some(2), m: Some(2), ..Default::default() };
    assert_eq!(run(IdentityId::Cor2, params, &exp1(), 1e-6).verdict, Verdict::Violated);
}

#[test]
fn both_orderings_of_the_combination_identity() {
    for order in [QuadOrder::Nested, QuadOrder::Enclosing] {
        let grid = GridSpec::default_for(&exp1()).with_order(order);
        let opts = ScanOptions::new(&exp1()).grid(grid).tol(1e-8);
        let rep = scan(IdentityId::Thm3, &Params::krmn(2, 1, 3, 5), &exp1(), &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Confirmed, "{order:?}");
        let rep = scan(IdentityId::Thm3, &Params::krmn(2, 1, 3, 5), &half(), &opts.grid(grid)).unwrap();
        assert_eq!(rep.verdict, Verdict::Violated, "{order:?}");
    }
}

/// Monte Carlo residuals sit within four propagated standard errors of the
/// quadrature residuals.
#[test]
fn monte_carlo_tracks_quadrature_on_random_cases() {
    let models = [exp1(), half(), weibull2(), HazardModel::linear_quadratic()];
    let ids = [
        IdentityId::AdjMean,
        IdentityId::Weights,
        IdentityId::Weights2,
        IdentityId::NecYab,
        IdentityId::Cor1,
        IdentityId::An,
        IdentityId::Thm2,
        IdentityId::Cor3,
        IdentityId::Sumspec,
        IdentityId::Thm3,
        IdentityId::Cor4,
    ];
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0);
    for case in 0..20u64 {
        let model = &models[rng.random_range(0..models.len())];
        let id = ids[rng.random_range(0..ids.len())];
        let k = rng.random_range(1..=2u32);
        let r = rng.random_range(1..=2u32);
        let params =
            Params { k: Some(k), r: Some(r), m: Some(k + 1), n: Some(k + 1 + rng.random_range(1..=2u32)), p: None };
        let base = model.lf() + rng.random_range(0.2..1.0);
        let mut xs = [base, base + rng.random_range(0.3..1.0), 0.0, 0.0];
        xs[2] = xs[1] + rng.random_range(0.3..1.0);
        xs[3] = xs[2] + rng.random_range(0.3..1.0);
        let point = match id.arity() {
            reclab::characterize::Arity::Pair => Point::pair(xs[0], xs[3]),
            reclab::characterize::Arity::Triple => Point::triple(xs[0], xs[1], xs[3]),
            reclab::characterize::Arity::Quadruple => Point::quadruple(xs[0], xs[1], xs[2], xs[3]),
        };
        let c = IdentityCase::new(id, params, point).unwrap();
        let q = residual(&c, model, Evaluation::Quad).unwrap();
        let mc = residual(&c, model, Evaluation::Mc { samples: 50_000, seed: case }).unwrap();
        let se = mc.stderr.unwrap();
        let gap = (mc.difference() - q.difference()).abs();
        assert!(gap <= 4.0 * se, "case {case} {id} {model}: |{gap:e}| > 4 x {se:e}");
    }
}
