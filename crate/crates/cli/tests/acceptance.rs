//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p coupled-cli --test acceptance`.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use coupled_cli::protocol::{read_frame, send_request};
use coupled_core::io::read_manifest;
use coupled_core::orbit::{DEFAULT_BURN, DEFAULT_PLOT};
use coupled_core::{
    compare, detect_cycle, random_initial, render_orbit, render_run, sample_curve, stability_check,
    CycleSettings, LinearPlusCoupler, MapFamily, Point, Raster, Scheme, SweepSpec, SystemConfig, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

const HEADLINE_SIZE: usize = 400;

fn coupled() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coupled"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn logistic_1d(p: f64, x: f64) -> f64 {
    4.0 * p * x * (1.0 - x)
}

fn tent_1d(p: f64, x: f64) -> f64 {
    p * (1.0 - (2.0 * x - 1.0).abs())
}

fn family_1d(f: MapFamily) -> fn(f64, f64) -> f64 {
    match f {
        MapFamily::Logistic => logistic_1d,
        MapFamily::Tent => tent_1d,
    }
}

/// Admissible coupler; a quarter of draws land on an edge of the triangle.
fn random_coupler(rng: &mut ChaCha8Rng) -> LinearPlusCoupler {
    let b: f64 = rng.random();
    let r = match rng.random_range(0..8) {
        0 => 0.0,
        1 => 1.0 - b,
        _ => rng.random::<f64>() * (1.0 - b),
    };
    LinearPlusCoupler::new(b, r)
}

fn random_config(rng: &mut ChaCha8Rng, scheme: Scheme, f: MapFamily, g: MapFamily) -> SystemConfig {
    SystemConfig {
        scheme,
        family_f: f,
        family_g: g,
        coupler_c: random_coupler(rng),
        coupler_d: random_coupler(rng),
    }
}

fn random_coord(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..16) {
        0 => 0.0,
        1 => 1.0,
        2 => 0.5,
        _ => rng.random(),
    }
}

fn combos() -> Vec<(Scheme, MapFamily, MapFamily)> {
    let mut v = Vec::new();
    for s in Scheme::ALL {
        for f in MapFamily::ALL {
            for g in MapFamily::ALL {
                v.push((s, f, g));
            }
        }
    }
    v
}

fn headline() -> SystemConfig {
    SystemConfig::logistic(Scheme::Simultaneous, 0.4, 0.6, 0.4, 0.6)
}

/// Conservation check applied to every raster the suite produces.
fn conserved(raster: &Raster, m: u64, what: &str) -> Result<(), String> {
    ensure(raster.total() == m, || format!("{what}: counts sum to {} not {m}", raster.total()))?;
    let occ = raster.occupancy();
    let rep = compare(&occ, &occ, 1).map_err(|e| e.to_string())?;
    ensure(
        rep.jaccard == 1.0 && rep.dilated_jaccard == 1.0 && rep.pixel_hausdorff == 0,
        || format!("{what}: compare(a,a) = {rep:?}"),
    )
}

fn closure() -> Outcome {
    const STEPS: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC105);
    let combos = combos();
    let start = Instant::now();
    let mut escapes = 0usize;
    let mut per_combo = vec![0usize; combos.len()];
    for i in 0..STEPS {
        let k = i % combos.len();
        let (s, f, g) = combos[k];
        let cfg = random_config(&mut rng, s, f, g);
        let z = Point {
            x: random_coord(&mut rng),
            y: random_coord(&mut rng),
        };
        let next = cfg.step(z);
        if !(next.x >= 0.0 && next.x <= 1.0 && next.y >= 0.0 && next.y <= 1.0) {
            escapes += 1;
        }
        per_combo[k] += 1;
    }
    let elapsed = start.elapsed();
    ensure(escapes == 0, || format!("{escapes} escapes from the unit square"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}, limit 10s"))?;
    Ok(format!(
        "{STEPS} steps over {} scheme/family combinations ({} each), 0 escapes, {:.3}s (limit 10s)",
        combos.len(),
        per_combo[0],
        elapsed.as_secs_f64()
    ))
}

fn decoupling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xDEC0);
    let combos = combos();
    let mut worst_ulp = 0u64;
    for trial in 0..100 {
        let (s, f, g) = combos[trial % combos.len()];
        let mut cfg = random_config(&mut rng, s, f, g);
        cfg.coupler_c.rate = 0.0;
        let b = cfg.coupler_c.base;
        let one_d = family_1d(f);
        let mut z = Point {
            x: rng.random(),
            y: rng.random(),
        };
        let mut x = z.x;
        for n in 0..10_000 {
            z = cfg.step(z);
            x = one_d(b, x);
            let ulp = z.x.to_bits().abs_diff(x.to_bits());
            worst_ulp = worst_ulp.max(ulp);
            ensure(ulp == 0 || (z.x - x).abs() <= 1e-12, || {
                format!("config {trial} ({cfg:?}) diverges at step {n}: {} vs {x}", z.x)
            })?;
        }
    }
    Ok(format!("100 configs x 10^4 steps, max difference {worst_ulp} ulp (limit 0 ulp or 1e-12)"))
}

fn scheme_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA6EE);
    let pairs = [
        (MapFamily::Logistic, MapFamily::Logistic),
        (MapFamily::Logistic, MapFamily::Tent),
        (MapFamily::Tent, MapFamily::Logistic),
        (MapFamily::Tent, MapFamily::Tent),
    ];
    for trial in 0..100 {
        let (f, g) = pairs[trial % pairs.len()];
        let mut simultaneous = random_config(&mut rng, Scheme::Simultaneous, f, g);
        simultaneous.coupler_d.rate = 0.0;
        let sequential = SystemConfig {
            scheme: Scheme::Sequential,
            ..simultaneous
        };
        let z0 = Point {
            x: rng.random(),
            y: rng.random(),
        };
        let (mut a, mut b) = (z0, z0);
        for n in 0..10_000 {
            a = simultaneous.step(a);
            b = sequential.step(b);
            ensure(a.x.to_bits() == b.x.to_bits() && a.y.to_bits() == b.y.to_bits(), || {
                format!("config {trial} differs at step {n}: {a:?} vs {b:?}")
            })?;
        }
    }
    Ok("100 configs x 10^4 steps, h and h' bitwise identical".into())
}

fn fixed_points() -> Outcome {
    let cases = [(0.1, Point::ORIGIN), (0.2, Point::ORIGIN), (0.5, Point { x: 0.5, y: 0.5 })];
    let settings = CycleSettings::default();
    let mut notes = Vec::new();
    for (b, expected) in cases {
        let cfg = SystemConfig::logistic(Scheme::Simultaneous, b, 0.0, b, 0.0);
        let start = Instant::now();
        let report = detect_cycle(&cfg, Point { x: 0.7, y: 0.6 }, DEFAULT_BURN, &settings);
        let elapsed = start.elapsed();
        let report = report.ok_or_else(|| format!("b={b}: no cycle found"))?;
        ensure(report.period == 1, || format!("b={b}: period {}", report.period))?;
        let d = report.points[0].chebyshev(&expected);
        ensure(d <= 1e-6, || format!("b={b}: point {:?} is {d:e} from {expected:?}", report.points[0]))?;
        ensure(elapsed < Duration::from_secs(1), || format!("b={b}: took {elapsed:?}, limit 1s"))?;
        notes.push(format!("b={b} period 1 off by {d:.1e} in {:.3}s", elapsed.as_secs_f64()));
    }
    Ok(format!("{} (tolerance 1e-6, limit 1s)", notes.join("; ")))
}

fn headline_run(rasters: &mut Vec<(String, Raster, u64)>) -> Outcome {
    let cfg = headline();
    let start = Instant::now();
    let raster = render_orbit(&cfg, Point { x: 0.7, y: 0.6 }, DEFAULT_BURN, DEFAULT_PLOT, HEADLINE_SIZE, HEADLINE_SIZE)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("render took {elapsed:?}, limit 30s"))?;
    let population = raster.occupancy().population();
    ensure(population > 1 && population < HEADLINE_SIZE * HEADLINE_SIZE, || {
        format!("degenerate image with {population} occupied pixels")
    })?;
    rasters.push(("headline render".into(), raster, DEFAULT_PLOT));

    let seeds = [1, 2, 3, 4, 5];
    let report = stability_check(&cfg, DEFAULT_BURN, DEFAULT_PLOT, HEADLINE_SIZE, HEADLINE_SIZE, &seeds, 1, 0.95)
        .map_err(|e| e.to_string())?;
    ensure(report.runs.len() == 6, || format!("{} runs, expected 5 seeds + one 2N run", report.runs.len()))?;
    ensure(report.verdict == Verdict::Stable, || {
        format!("verdict unstable, min dilated jaccard {:.4}", report.min_dilated_jaccard)
    })?;
    for &seed in &seeds {
        let r = render_orbit(&cfg, random_initial(seed), DEFAULT_BURN, DEFAULT_PLOT, HEADLINE_SIZE, HEADLINE_SIZE)
            .map_err(|e| e.to_string())?;
        rasters.push((format!("stability trial seed {seed}"), r, DEFAULT_PLOT));
    }
    let r = render_orbit(&cfg, random_initial(seeds[0]), 2 * DEFAULT_BURN, DEFAULT_PLOT, HEADLINE_SIZE, HEADLINE_SIZE)
        .map_err(|e| e.to_string())?;
    rasters.push(("stability 2N run".into(), r, DEFAULT_PLOT));
    Ok(format!(
        "400x400 render in {:.3}s (limit 30s), {population} pixels occupied; stable with min dilated jaccard {:.4} (threshold 0.95, dilation 1)",
        elapsed.as_secs_f64(),
        report.min_dilated_jaccard
    ))
}

fn dir_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        let bytes = fs::read(e.path()).map_err(|e| e.to_string())?;
        files.push((e.file_name().to_string_lossy().into_owned(), bytes));
    }
    files.sort();
    Ok(files)
}

fn sweep(rasters: &mut Vec<(String, Raster, u64)>) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut dirs = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        let res = coupled()
            .args(["sweep", "--grid", "21", "--bp", "0.4", "--rp", "0.6", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(res.status.success(), || format!("sweep failed: {}", String::from_utf8_lossy(&res.stderr)))?;
        dirs.push(out);
    }
    let manifest = read_manifest(dirs[0].join("manifest.json")).map_err(|e| e.to_string())?;
    ensure(manifest.frames.len() == 21, || format!("{} frames", manifest.frames.len()))?;
    for (i, f) in manifest.frames.iter().enumerate() {
        let caption: f64 = format!("{:.2}", i as f64 * 0.05).parse().unwrap();
        ensure(f.s == caption, || format!("frame {i}: s = {} not {caption}", f.s))?;
        ensure(f.params.b == f.s && f.params.r == 1.0 - f.s, || format!("frame {i}: params {:?}", f.params))?;
        ensure(f.params.b_prime == 0.4 && f.params.r_prime == 0.6, || format!("frame {i}: params {:?}", f.params))?;
        ensure(f.error.is_none(), || format!("frame {i}: {:?}", f.error))?;
    }
    let (a, b) = (dir_bytes(&dirs[0])?, dir_bytes(&dirs[1])?);
    ensure(a == b, || "the two sweep directories differ".into())?;

    let spec = SweepSpec::canonical(0.4, 0.6, Scheme::Simultaneous);
    let samples = sample_curve(&spec.curve, spec.grid_count).map_err(|e| e.to_string())?;
    for (i, (_, p)) in samples.iter().enumerate() {
        let doc = spec.frame_config(i, p);
        let out = render_run(&doc, |_, _| {}).map_err(|e| e.to_string())?;
        rasters.push((format!("sweep frame {i}"), out.raster, doc.m_collect));
    }
    Ok(format!(
        "21 frames with s = 0.00, 0.05, ..., 1.00 exactly; two runs byte-identical over {} files",
        a.len()
    ))
}

fn serve_transcript(requests: &[Value]) -> Result<Vec<Vec<u8>>, String> {
    let mut child = coupled()
        .args(["serve", "--stdio"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut stdin = child.stdin.take().unwrap();
    for r in requests {
        send_request(&mut stdin, r).map_err(|e| e.to_string())?;
    }
    drop(stdin);
    let mut stdout = child.stdout.take().unwrap();
    let mut frames = Vec::new();
    while let Some(f) = read_frame(&mut stdout).map_err(|e| e.to_string())? {
        frames.push(f);
    }
    let status = child.wait().map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("serve exited with {status}"))?;
    Ok(frames)
}

fn determinism(serve_totals: &mut Vec<(String, u64, u64)>) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut images = Vec::new();
    for name in ["a.pgm", "b.pgm"] {
        let out = tmp.path().join(name);
        let res = coupled()
            .args(["render", "--quiet", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(res.status.success(), || format!("render failed: {}", String::from_utf8_lossy(&res.stderr)))?;
        images.push(fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(images[0] == images[1], || "render outputs differ".into())?;

    let render = json!({"id": 7, "op": "render", "params": {"b": 0.3, "r": 0.7}});
    let cycle = json!({"id": 8, "op": "cycle", "params": {"b": 0.5, "r": 0.0, "b_prime": 0.5, "r_prime": 0.0}});
    let requests = [render.clone(), cycle.clone(), render.clone(), cycle.clone()];
    let first = serve_transcript(&requests)?;
    let second = serve_transcript(&requests)?;
    // render: envelope + pixels, cycle: envelope
    ensure(first.len() == 6, || format!("{} response frames, expected 6", first.len()))?;
    ensure(first[0..3] == first[3..6], || "repeated requests on one connection differ".into())?;
    ensure(first == second, || "responses differ between server processes".into())?;
    let envelope: Value = serde_json::from_slice(&first[0]).map_err(|e| e.to_string())?;
    serve_totals.push((
        "serve render".into(),
        envelope["total_count"].as_u64().unwrap_or(0),
        DEFAULT_PLOT,
    ));
    Ok(format!(
        "two renders of {} bytes identical; serve responses identical within and across processes",
        images[0].len()
    ))
}

fn conservation(rasters: &[(String, Raster, u64)], serve_totals: &[(String, u64, u64)]) -> Outcome {
    ensure(!rasters.is_empty(), || "no rasters were produced by earlier criteria".into())?;
    for (what, raster, m) in rasters {
        conserved(raster, *m, what)?;
    }
    for (what, total, m) in serve_totals {
        ensure(total == m, || format!("{what}: total_count {total} not {m}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0A5);
    let combos = combos();
    for (i, &(s, f, g)) in combos.iter().enumerate() {
        let cfg = random_config(&mut rng, s, f, g);
        let m = rng.random_range(1..50_000);
        let r = render_orbit(&cfg, random_initial(i as u64), 1000, m, 97, 61).map_err(|e| e.to_string())?;
        conserved(&r, m, &format!("random render {i}"))?;
    }
    Ok(format!(
        "{} rasters sum to M and self-compare to (1, 1, 0)",
        rasters.len() + serve_totals.len() + combos.len()
    ))
}

fn main() -> ExitCode {
    let mut rasters = Vec::new();
    let mut serve_totals = Vec::new();
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())))));
        match &outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => println!("FAIL  {name}: {detail}"),
        }
        results.push((name, outcome));
    };

    run("closure", &mut closure);
    run("decoupling", &mut decoupling);
    run("scheme agreement", &mut scheme_agreement);
    run("fixed points", &mut fixed_points);
    run("headline run", &mut || headline_run(&mut rasters));
    run("sweep", &mut || sweep(&mut rasters));
    run("determinism", &mut || determinism(&mut serve_totals));
    run("raster conservation", &mut || conservation(&rasters, &serve_totals));

    let failed = results.iter().filter(|(_, o)| o.is_err()).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
