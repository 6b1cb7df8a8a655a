//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;

use gaugeforge::expr::{MultiFn, ScalarFn};
use gaugeforge::fields::{
    dirac_kinetic, four_gradient, linear_dirac_residual, EnergySign, PlaneWave, PlaneWaveSpec, SpinorField,
    StencilOrder, WaveSum,
};
use gaugeforge::gamma::{bilinear_x, bilinear_y, gammas, lorentz_spin_element, Mat4, METRIC};
use gaugeforge::nlde::{
    reduction_check, residual_ladder, sample_points, transform_solution, Region, SolutionMap, SolutionSettings,
};
use gaugeforge::suite::{execute, trivial_specs, RunConfig};
use gaugeforge::transforms::check::{run_samples, sample_lorentz, sample_spinor};
use gaugeforge::transforms::controls::{density_breaking_chiral, poincare_breaking, NonSeparable};
use gaugeforge::transforms::group::{
    check_associativity, check_dual_path, check_equivalence_composition, check_general_composition, check_identity,
    check_inverse,
};
use gaugeforge::transforms::{
    check_equivalence, check_poincare, check_separability, CheckConfig, EquivalenceTransform, Gamma5Coefficient,
    GeneralLSTransform, InvariantTransform, KMatrix, PhaseVariant, Requirements, Transform,
};

const LADDER: [f64; 3] = [4e-3, 2e-3, 1e-3];

type Outcome = (bool, String);

fn s(t: &str) -> ScalarFn {
    ScalarFn::parse(t).unwrap()
}

fn eq(a_hat: f64, phi: &str, rho: &str, v: PhaseVariant) -> EquivalenceTransform {
    EquivalenceTransform::parse(a_hat, phi, rho).unwrap().with_variant(v)
}

fn equivalence_set() -> Vec<EquivalenceTransform> {
    let mut out = Vec::new();
    for v in [PhaseVariant::WithI, PhaseVariant::WithoutI] {
        out.push(EquivalenceTransform::identity().with_variant(v));
        out.push(eq(0.5, "0.1*z", "0.3*z/(1 + z^2)", v));
        out.push(eq(-1.2, "sin(z)", "0.4/(1 + z^2)", v));
        out.push(eq(2.0, "0", "0", v));
    }
    out
}

fn invariant_set() -> Vec<InvariantTransform> {
    vec![
        InvariantTransform::identity(),
        InvariantTransform::new(Complex64::new(3.0, 0.0), s("z"), s("1")),
        InvariantTransform::new(Complex64::new(0.5, 0.7), s("cos(0.2*z)"), s("sin(0.2*z)")),
        InvariantTransform::new(Complex64::new(1.0, 0.0), s("1 + 0.1*z^2"), s("0.3*i")),
    ]
}

fn clifford() -> Outcome {
    let g = gammas();
    let id = Mat4::identity();
    let mut worst = 0.0f64;
    for mu in 0..4 {
        for nu in 0..4 {
            let metric = if mu == nu { METRIC[mu] } else { 0.0 };
            for set in [&g.lower, &g.upper] {
                let anti = set[mu].anticommutator(&set[nu]) - id.scale(Complex64::new(2.0 * metric, 0.0));
                worst = worst.max(anti.max_abs());
            }
        }
        worst = worst.max(g.gamma5.anticommutator(&g.upper[mu]).max_abs());
    }
    worst = worst.max((g.gamma5 * g.gamma5 - id).max_abs());
    worst = worst.max((g.gamma5 - g.gamma5.adjoint()).max_abs());
    (worst < 1e-14, format!("max entrywise error {worst:.1e}"))
}

fn bilinear_invariance() -> Outcome {
    let cfg = CheckConfig::default().with_samples(10_000).with_tolerance(1e-10);
    let r = run_samples("bilinear", "X, Y under U".into(), &cfg, &["x", "y"], |rng| {
        let Some(psi) = sample_spinor(rng, &cfg, Requirements::default()) else {
            return Ok(None);
        };
        let u = lorentz_spin_element(&sample_lorentz(rng, cfg.lorentz_bound));
        let moved = u * psi;
        let dx = (bilinear_x(&moved) - bilinear_x(&psi)).abs();
        let dy = (bilinear_y(&moved) - bilinear_y(&psi)).norm();
        Ok(Some(vec![dx.max(dy), dx, dy]))
    });
    (
        r.passed && r.evaluated == 10_000,
        format!("{} pairs, max |dX| {:.1e}, max |dY| {:.1e}", r.evaluated, r.metrics["x"], r.metrics["y"]),
    )
}

fn poincare() -> Outcome {
    let cfg = CheckConfig::default().with_samples(1000);
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut subjects: Vec<Transform> = invariant_set().into_iter().map(Transform::from).collect();
    subjects.extend(equivalence_set().into_iter().map(Transform::from));
    for t in &subjects {
        let r = check_poincare(t, &cfg);
        ok &= r.passed && r.evaluated >= 1000;
        worst = worst.max(r.max_deviation);
    }
    let control = check_poincare(&poincare_breaking(), &cfg);
    ok &= control.max_deviation > 1e-3;
    (
        ok,
        format!(
            "{} transforms, max {worst:.1e}; control {:.2e}",
            subjects.len(),
            control.max_deviation
        ),
    )
}

fn density() -> Outcome {
    let cfg = CheckConfig::default().with_samples(10_000).with_tolerance(1e-12);
    let mut worst = 0.0f64;
    let mut ok = true;
    for n in equivalence_set().into_iter().filter(|n| n.variant == PhaseVariant::WithI) {
        let r = check_equivalence(&n, &cfg);
        ok &= r.passed && r.evaluated == 10_000;
        worst = worst.max(r.max_deviation);
    }
    let control = check_equivalence(&density_breaking_chiral(), &cfg);
    ok &= control.max_deviation > 1e-3;
    (ok, format!("with_i max {worst:.1e}; without_i rho=0.3*z max {:.2e}", control.max_deviation))
}

fn separability() -> Outcome {
    let cfg = CheckConfig::default();
    let general = GeneralLSTransform::new(
        KMatrix::new(Complex64::new(1.2, 0.4), Complex64::new(0.3, 1.0)),
        [
            MultiFn::parse("1 + 0.1*r2").unwrap(),
            MultiFn::parse("exp(0.2*i*s1)").unwrap(),
            MultiFn::one(),
            MultiFn::parse("0.5 + r1*r3").unwrap(),
        ],
    );
    let mut maps: Vec<GeneralLSTransform> = vec![general];
    maps.extend(invariant_set().iter().map(|n| n.lower(Gamma5Coefficient::One)));
    maps.extend(equivalence_set().iter().map(|n| Transform::from(n.clone()).to_general()));
    let mut worst = 0.0f64;
    let mut ok = true;
    for m in &maps {
        let r = check_separability(m, &cfg);
        ok &= r.passed;
        worst = worst.max(r.max_deviation);
    }
    let control = check_separability(&NonSeparable, &cfg);
    ok &= control.max_deviation > 1e-3;
    (ok, format!("{} maps, max {worst:.1e}; control {:.2e}", maps.len(), control.max_deviation))
}

fn group_laws() -> Outcome {
    // composites are undefined where the first map leaves X ≤ 0; those samples are skipped
    let cfg = CheckConfig::default().with_samples(1000);
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut fewest = usize::MAX;
    let mut note = |r: &gaugeforge::report::VerificationReport| {
        ok &= r.passed && r.evaluated >= 500;
        fewest = fewest.min(r.evaluated);
        worst = worst.max(r.max_deviation);
    };
    let set = equivalence_set();
    for v in [PhaseVariant::WithI, PhaseVariant::WithoutI] {
        let members: Vec<&EquivalenceTransform> = set.iter().filter(|n| n.variant == v).collect();
        for a in &members {
            note(&check_identity(a, &cfg).unwrap());
            note(&check_inverse(a, &cfg));
            for b in &members {
                let r = check_equivalence_composition(a, b, &cfg).unwrap();
                assert_eq!(r.metrics["a_hat_additivity_error"], 0.0);
                note(&r);
            }
        }
        note(&check_associativity(members[1], members[2], members[3], &cfg).unwrap());
    }
    let n1 = GeneralLSTransform::new(
        KMatrix::new(Complex64::new(1.2, 0.4), Complex64::new(0.3, 1.0)),
        [MultiFn::parse("1 + 0.1*r2").unwrap(), MultiFn::one(), MultiFn::one(), MultiFn::parse("0.5 + r1*r3").unwrap()],
    );
    let n2 = GeneralLSTransform::new(
        KMatrix::new(Complex64::new(0.8, -0.3), Complex64::new(0.0, 2.0)),
        [MultiFn::parse("1 + 0.2*cos(s2)").unwrap(), MultiFn::one(), MultiFn::one(), MultiFn::one()],
    );
    let r = check_general_composition(&n1, &n2, &cfg).unwrap();
    let k_err = r.metrics["k_product_error"];
    note(&r);
    (
        ok && k_err == 0.0,
        format!("max {worst:.1e} over >= {fewest} samples each, K product error {k_err:e}, a_hat additivity exact"),
    )
}

fn dual_path() -> Outcome {
    let cfg = CheckConfig::default();
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut other = f64::INFINITY;
    for n in invariant_set() {
        let d = check_dual_path(&n, &cfg);
        ok &= d.matching == Some(Gamma5Coefficient::One) || (d.one.passed && n.h2.is_zero());
        ok &= d.one.passed;
        worst = worst.max(d.one.max_deviation);
        if !n.h2.is_zero() {
            other = other.min(d.minus_i.max_deviation);
        }
    }
    (ok, format!("coefficient one: max {worst:.1e}; minus_i off by at least {other:.2e}"))
}

fn wave_sum(terms: &[([f64; 2], [f64; 3], u8, EnergySign)]) -> WaveSum {
    WaveSum::new(
        terms
            .iter()
            .map(|&(c, p, spin, e)| (Complex64::new(c[0], c[1]), PlaneWaveSpec::new(1.0, p, spin, e)))
            .collect(),
    )
    .unwrap()
}

fn solution_mapping() -> Outcome {
    let start = Instant::now();
    let sources = [
        wave_sum(&[
            ([1.0, 0.0], [0.4, -0.3, 0.2], 0, EnergySign::Positive),
            ([0.6, 0.4], [-0.2, 0.5, 0.1], 0, EnergySign::Negative),
        ]),
        wave_sum(&[
            ([1.0, 0.0], [0.0, 0.0, 1.0], 0, EnergySign::Positive),
            ([0.0, 0.7], [0.0, 1.0, 0.0], 1, EnergySign::Positive),
        ]),
        wave_sum(&[
            ([1.0, 0.0], [3.0, -2.0, 1.0], 0, EnergySign::Positive),
            ([0.5, 0.5], [-1.0, 2.5, 2.0], 1, EnergySign::Positive),
        ]),
    ];
    let maps = [
        eq(0.5, "0.1*z", "0.3*z/(1 + z^2)", PhaseVariant::WithI),
        eq(0.0, "0", "0.4/(1 + z^2)", PhaseVariant::WithI),
    ];
    let pairs = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)];
    let settings = SolutionSettings::default();
    let mut ok = true;
    let mut slopes = Vec::new();
    let mut plateau = f64::INFINITY;
    for (si, mi) in pairs {
        let sol = transform_solution(&sources[si], &SolutionMap::from(maps[mi].clone()), &settings).unwrap();
        ok &= sol.certificate.passed && sol.points.len() >= 16;
        let r = residual_ladder(sol.field.as_ref(), &sol.spec, &sol.points, &LADDER, StencilOrder::Fourth);
        ok &= r.slope_matches_order(0.15);
        slopes.push(r.slope.unwrap_or(f64::NAN));
        let crossed = sol.spec.clone().with_variant(PhaseVariant::WithoutI);
        for (field, spec) in [(sol.source.as_ref(), &sol.spec), (sol.field.as_ref(), &crossed)] {
            let m = residual_ladder(field, spec, &sol.points, &LADDER, StencilOrder::Fourth);
            let finest = m.finest().unwrap().max;
            ok &= finest > 1e-3 && !m.slope_matches_order(0.15);
            plateau = plateau.min(m.steps.iter().map(|s| s.max).fold(f64::INFINITY, f64::min));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    let list: Vec<String> = slopes.iter().map(|s| format!("{s:.3}")).collect();
    (
        ok,
        format!("slopes [{}]; mismatched residuals stay above {plateau:.2e}; {secs:.1} s", list.join(", ")),
    )
}

fn reduction() -> Outcome {
    let cfg = CheckConfig::default().with_samples(1000);
    let mut ok = true;
    let mut names = Vec::new();
    for v in [PhaseVariant::WithI, PhaseVariant::WithoutI] {
        for (a_hat, phi, rho) in [(0.5, "0.1*z", "0.3*z"), (-1.0, "sin(z)", "0.4/(1 + z^2)")] {
            let r = reduction_check(a_hat, &s(phi), &s(rho), v, (-5.0, 5.0), &cfg);
            let matches = r.candidates[..2].iter().filter(|c| c.matches).count();
            ok &= matches == 1 && r.report.evaluated >= 1000 && r.report.max_deviation < 1e-12;
            names.push(r.matching.unwrap_or_else(|| "none".into()));
        }
    }
    names.dedup();
    ok &= names == ["n = rho"];
    (ok, format!("matching candidate: {}", names.join(" / ")))
}

fn linear_limit() -> Outcome {
    let mut ok = true;
    let mut diff = 0.0f64;
    let mut floor = 0.0f64;
    let waves = [
        PlaneWaveSpec::new(1.0, [0.0; 3], 0, EnergySign::Positive),
        PlaneWaveSpec::new(1.0, [2.0, -1.5, 2.5], 1, EnergySign::Positive),
        PlaneWaveSpec::new(0.7, [-0.5, 0.3, 1.1], 0, EnergySign::Negative),
    ];
    let cfg = CheckConfig::default().with_samples(16);
    for spec in waves {
        let wave = PlaneWave::new(spec).unwrap();
        let points = sample_points(&wave, &Region::default(), &cfg, Requirements::default());
        for (_, h) in trivial_specs(spec.mass) {
            for x in &points {
                let grad = four_gradient(&wave, x, 1e-3, StencilOrder::Fourth).unwrap();
                let psi = wave.eval(x).unwrap();
                let r = dirac_kinetic(&grad) + h.eval(&psi, &grad).unwrap();
                let lin = linear_dirac_residual(&wave, spec.mass, x, 1e-3, StencilOrder::Fourth).unwrap();
                diff = diff.max((r - lin).norm());
                floor = floor.max(lin.norm());
            }
            let r2 = residual_ladder(&wave, &h, &points, &LADDER, StencilOrder::Second);
            ok &= r2.slope_matches_order(0.15) || r2.max() < 1e-9;
        }
    }
    ok &= diff <= 1e-12 && floor < 1e-7;
    (ok, format!("{} operators, |r_H - r_lin| <= {diff:.1e}, order-4 floor {floor:.1e}", trivial_specs(1.0).len()))
}

fn determinism() -> Outcome {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/demo.toml")).unwrap();
    let cfg: RunConfig = toml::from_str(&text).unwrap();
    let first = execute(&cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let second = pool.install(|| execute(&cfg)).unwrap();
    let a = serde_json::to_string_pretty(&first.without_timings()).unwrap();
    let b = serde_json::to_string_pretty(&second.without_timings()).unwrap();
    (
        a == b && first.passed,
        format!("demo config, {} bytes, identical across thread counts: {}", a.len(), a == b),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("clifford algebra", clifford),
        ("bilinear invariance", bilinear_invariance),
        ("poincare intertwining", poincare),
        ("density equivalence", density),
        ("separability", separability),
        ("group laws", group_laws),
        ("dual path", dual_path),
        ("solution mapping", solution_mapping),
        ("reduction", reduction),
        ("linear limit", linear_limit),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    let out = std::io::stdout();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| (false, "panicked".into()));
        let line = format!("{} {:>2} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" }, k + 1);
        // written past the test harness capture so the lines always show
        out.lock().write_all(line.as_bytes()).unwrap();
        if !ok {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
