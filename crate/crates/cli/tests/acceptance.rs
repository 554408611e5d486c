//! Acceptance criteria. Prints one line per criterion and exits nonzero if
//! any of them fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cohatlas::config::Kind;
use cohatlas::run::run_config;
use cohatlas_core::coherent::{eigen_residual, resolve_unity, tail_bound, CoherentLabel, StateFamily};
use cohatlas_core::fock::{commutator, make_ladder, make_quadratures, ModeSpec};
use cohatlas_core::phase_space::{dbar_classify, Holomorphy, Monomial, Poly, PolyMap};
use cohatlas_core::quadrature::QuadratureGrid;
use cohatlas_core::quantize::{
    coherence_map_test, commutator_diagnostic, normal_order_quantize, primed_vacuum, realize_map, vacuum_residual,
};
use cohatlas_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;

/// Name, runtime limit in seconds, check.
type Criterion = (&'static str, Option<u64>, fn() -> Check);

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_complex(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    let r = radius * rng.gen::<f64>().sqrt();
    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn single_mode(holo: &[C64], anti: &[C64]) -> PolyMap {
    let mut terms = Vec::new();
    for (d, &c) in holo.iter().enumerate() {
        terms.push((c, Monomial::new(vec![d as u32 + 1], vec![0]).unwrap()));
    }
    for (d, &c) in anti.iter().enumerate() {
        terms.push((c, Monomial::new(vec![0], vec![d as u32 + 1]).unwrap()));
    }
    PolyMap::new(1, vec![Poly::from_terms(1, terms).unwrap()]).unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn ladder_suite() -> Check {
    let mut worst: f64 = 0.0;
    for n in [4, 8, 16, 32] {
        let spec = ModeSpec::new(1, n).map_err(err)?;
        let (a, ad) = make_ladder(spec, 0).map_err(err)?;
        let (q, p) = make_quadratures(spec, 0).map_err(err)?;
        let ca = commutator(&a, &ad).map_err(err)?;
        let cqp = commutator(&q, &p).map_err(err)?;
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ca.get(i, j) - C64::new(delta, 0.0)).norm());
                worst = worst.max((cqp.get(i, j) - C64::new(0.0, delta)).norm());
            }
        }
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:.3e} (tol 1e-12)"))
}

fn coherent_eigen() -> Check {
    let spec = ModeSpec::new(1, 32).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_z, mut over_bound) = (0.0_f64, 0.0_f64, 0);
    for _ in 0..50 {
        let z = random_complex(&mut rng, 2.0);
        let r = eigen_residual(&CoherentLabel::single(z).map_err(err)?, spec).map_err(err)?[0];
        // Below the rounding floor the computed residual is noise.
        let floor = 4.0 * f64::EPSILON * (1.0 + z.norm());
        if r > tail_bound(z.norm(), 32) + floor {
            over_bound += 1;
        }
        if r > worst {
            worst = r;
            worst_z = z.norm();
        }
    }
    ensure(
        over_bound == 0 && worst <= 1e-10,
        format!("max residual {worst:.3e} at |z| = {worst_z:.3} (tol 1e-10), {over_bound} above tail bound"),
    )
}

fn unity() -> Check {
    let spec = ModeSpec::new(1, 16).map_err(err)?;
    let mut res = Vec::new();
    for (r, m, cut) in [(64, 128, 6.0), (128, 256, 12.0), (256, 512, 24.0)] {
        let grid = QuadratureGrid::new(r, m, cut).map_err(err)?;
        res.push(resolve_unity(spec, &grid, &StateFamily::Coherent, None).map_err(err)?.max_residual);
    }
    let monotone = res.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    let shown: Vec<String> = res.iter().map(|r| format!("{r:.3e}")).collect();
    ensure(res[0] < 1e-8 && monotone, format!("residuals {} (base tol 1e-8, growth <= 10%)", shown.join(" -> ")))
}

fn holomorphic_globality() -> Check {
    let spec = ModeSpec::new(1, 48).map_err(err)?;
    let label = CoherentLabel::single(C64::new(0.8, 0.0)).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut vac, mut coh) = (0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let degree = rng.gen_range(1..=3);
        let holo: Vec<C64> = (0..degree).map(|_| random_complex(&mut rng, 1.0)).collect();
        let map = single_mode(&holo, &[]);
        if dbar_classify(&map).class != Holomorphy::Holomorphic {
            return Err("generated map is not holomorphic".into());
        }
        let g = realize_map(&normal_order_quantize(&map), spec).map_err(err)?;
        vac = vac.max(vacuum_residual(&g[0]));
        coh = coh.max(coherence_map_test(&map, &label, spec).map_err(err)?.residual);
    }
    ensure(
        vac == 0.0 && coh <= 1e-6,
        format!("max vacuum residual {vac:e} (exact 0), max coherence residual {coh:.3e} (tol 1e-6)"),
    )
}

fn observer_dependence() -> Check {
    let spec = ModeSpec::new(1, 32).map_err(err)?;
    let sum = PolyMap::linear(C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let g = realize_map(&normal_order_quantize(&sum), spec).map_err(err)?;
    let sum_res = vacuum_residual(&g[0]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut zero_ok) = (0.0_f64, true);
    for i in 0..10 {
        let holo: Vec<C64> = (0..rng.gen_range(1..=3)).map(|_| random_complex(&mut rng, 1.0)).collect();
        let mut anti: Vec<C64> = (0..rng.gen_range(1..=3)).map(|_| random_complex(&mut rng, 1.0)).collect();
        if i % 3 == 2 {
            anti[0] = C64::new(0.0, 0.0);
        }
        let map = single_mode(&holo, &anti);
        let g = realize_map(&normal_order_quantize(&map), spec).map_err(err)?;
        let r = vacuum_residual(&g[0]);
        let mut fact = 1.0;
        let mut jet = 0.0;
        for (k, b) in anti.iter().enumerate() {
            fact *= (k + 1) as f64;
            jet += fact * b.norm_sqr();
        }
        worst = worst.max((r - jet.sqrt()).abs());
        if anti[0].norm() > 0.0 && r == 0.0 {
            zero_ok = false;
        }
    }
    ensure(
        (sum_res - 1.0).abs() <= 1e-12 && worst <= 1e-10 && zero_ok,
        format!("w + w\u{304} residual {sum_res:.16} (1 +- 1e-12), split family max deviation {worst:.3e} (tol 1e-10)"),
    )
}

fn bogoliubov() -> Check {
    let spec = ModeSpec::new(1, 48).map_err(err)?;
    let (mut comm, mut defect, mut dev) = (0.0_f64, 0.0_f64, 0.0_f64);
    for t in [0.3_f64, 0.5, 1.0] {
        let map = PolyMap::linear(C64::new(t.cosh(), 0.0), C64::new(t.sinh(), 0.0));
        comm = comm.max(commutator_diagnostic(&map, spec).map_err(err)?);
        let g = realize_map(&normal_order_quantize(&map), spec).map_err(err)?;
        let pv = primed_vacuum(&g[0]).map_err(err)?;
        defect = defect.max(pv.defect);
        dev = dev.max((pv.vacuum_overlap() - t.cosh().powf(-0.5)).abs());
    }
    ensure(
        comm <= 1e-10 && defect <= 1e-6 && dev <= 1e-6,
        format!(
            "commutator {comm:.3e} (tol 1e-10), defect {defect:.3e} (tol 1e-6), overlap deviation {dev:.3e} (tol 1e-6)"
        ),
    )
}

fn transported_unity() -> Check {
    let spec = ModeSpec::new(1, 16).map_err(err)?;
    let family = StateFamily::Transported(PolyMap::linear(C64::new(1.0, 0.0), C64::new(1.0, 0.0)));
    let r = resolve_unity(spec, &QuadratureGrid::default(), &family, None).map_err(err)?.max_residual;
    ensure(r > 0.1, format!("residual {r:.6} (must exceed 0.1)"))
}

fn atlas_item<'a>(body: &'a Value, name: &str) -> Option<&'a Value> {
    body["items"].as_array()?.iter().find(|i| i["name"] == name)
}

fn atlas_verdicts() -> Check {
    let cfg = configs().join("atlas-check.json");
    let first = run_config(Kind::AtlasCheck, &cfg).map_err(err)?;
    let second = run_config(Kind::AtlasCheck, &cfg).map_err(err)?;
    let body = &first.report.body;
    let mut seen = Vec::new();
    let mut ok = first.report.comparable_body() == second.report.comparable_body();
    for (name, structure, coherence) in [
        ("rotations", "ComplexStructure", "GLOBAL"),
        ("bogoliubov", "AlmostComplexOnly", "LOCAL"),
        ("sum", "AlmostComplexOnly", "LOCAL"),
    ] {
        let item = atlas_item(body, name).ok_or_else(|| format!("missing atlas {name}"))?;
        let (s, c) = (item["structure"].as_str().unwrap_or("?"), item["coherence"].as_str().unwrap_or("?"));
        ok &= s == structure && c == coherence;
        seen.push(format!("{name}: {s}/{c}"));
    }
    ensure(ok, seen.join(", "))
}

fn cli_determinism() -> Check {
    let kinds = [
        (Kind::ClassifyMap, "classify-map.json"),
        (Kind::VacuumTest, "vacuum-test.json"),
        (Kind::CoherenceTest, "coherence-test.json"),
        (Kind::ResolveUnity, "resolve-unity.json"),
        (Kind::AtlasCheck, "atlas-check.json"),
        (Kind::DualityFilter, "duality-filter.json"),
    ];
    let mut differing = Vec::new();
    for (kind, file) in kinds {
        let path = configs().join(file);
        let a = run_config(kind, &path).map_err(err)?.report.comparable_body();
        let b = run_config(kind, &path).map_err(err)?.report.comparable_body();
        if a != b {
            differing.push(file);
        }
    }
    ensure(differing.is_empty(), format!("{} configs, differing: {:?}", kinds.len(), differing))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("ladder and quadrature commutators", Some(1), ladder_suite),
        ("coherent eigen-equation", Some(5), coherent_eigen),
        ("resolution of unity", Some(30), unity),
        ("holomorphic maps keep the vacuum", Some(60), holomorphic_globality),
        ("observer-dependent vacuum", Some(10), observer_dependence),
        ("Bogoliubov cross-check", Some(30), bogoliubov),
        ("transported family fails unity", Some(30), transported_unity),
        ("atlas verdicts", Some(60), atlas_verdicts),
        ("CLI determinism", None, cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let slow = limit.is_some_and(|s| elapsed > Duration::from_secs(s));
        let (pass, detail) = match result {
            Ok(d) => (!slow, d),
            Err(d) => (false, d),
        };
        let limit_text = limit.map_or(String::new(), |s| format!(", limit {s} s"));
        println!(
            "[{}] {}. {}: {} ({:.2} s{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            detail,
            elapsed.as_secs_f64(),
            limit_text
        );
        if !pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
