//! Subcommand implementations. Each returns `Ok(())` only when its artifact
//! was fully produced.

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use coupled_core::io::config::{InitialPoint, RunConfigDocument};
use coupled_core::io::{write_config, write_pgm, write_png};
use coupled_core::orbit::detect_cycle_from;
use coupled_core::sweep::{ParameterCurve, SweepSpec, MANIFEST_FILE};
use coupled_core::{
    iterate_burn, render_run, run_sweep, stability_check, CycleReport, ParamVector, Point, StabilityReport,
    StabilitySettings,
};
use serde_json::json;

use crate::args::{
    seeded_defaults, still_defaults, CycleArgs, RenderArgs, ServeArgs, StabilityArgs, SweepArgs,
};
use crate::server::Engine;

fn log_resolved(command: &str, doc: &RunConfigDocument) {
    eprintln!("{command}: resolved {}", doc.to_json_line());
}

/// `<out>` with its extension replaced by `run.json`.
pub fn run_record_path(out: &Path) -> PathBuf {
    out.with_extension("run.json")
}

pub fn cmd_render(args: &RenderArgs) -> Result<()> {
    let doc = args.system.resolve(still_defaults())?;
    log_resolved("render", &doc);
    let quiet = args.quiet;
    let outcome = render_run(&doc, |done, total| {
        if !quiet {
            let pct = (done * 100).checked_div(total).unwrap_or(100);
            eprintln!("render: burn-in {done}/{total} ({pct}%)");
        }
    })?;
    if let Some(c) = &outcome.cycle {
        eprintln!("render: period-{} cycle found, points enlarged to {}px", c.period, doc.enlargement);
    }

    let is_png = args.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        write_png(&outcome.image, &args.out)?;
    } else {
        write_pgm(&outcome.image, &args.out)?;
        if args.png {
            write_png(&outcome.image, args.out.with_extension("png"))?;
        }
    }
    write_config(&doc, run_record_path(&args.out))?;
    eprintln!("render: wrote {}", args.out.display());
    Ok(())
}

/// Burns in from the resolved initial point and searches for a cycle.
pub fn cycle_report(doc: &RunConfigDocument) -> coupled_core::Result<(Point, Option<CycleReport>)> {
    let system = doc.system.validated()?;
    let initial = doc.initial.resolve();
    let burned = iterate_burn(&system, initial, doc.n_burn);
    Ok((initial, detect_cycle_from(&system, burned, &doc.cycle)))
}

/// Seeds `seed, seed + 1, ...`; needs a seeded document.
pub fn stability_report(
    doc: &RunConfigDocument,
    checks: &StabilitySettings,
) -> coupled_core::Result<StabilityReport> {
    let InitialPoint::Seed(base) = doc.initial else {
        return Err(coupled_core::Error::InvalidArgument(
            "the stability check draws its own initial points; use a seed instead of x0/y0".into(),
        ));
    };
    let seeds: Vec<u64> = (0..checks.trials as u64).map(|k| base.wrapping_add(k)).collect();
    stability_check(
        &doc.system.validated()?,
        doc.n_burn,
        doc.m_collect,
        doc.width,
        doc.height,
        &seeds,
        checks.dilation,
        checks.threshold,
    )
}

pub fn cmd_cycle(args: &CycleArgs) -> Result<()> {
    let doc = args.system.resolve(still_defaults())?;
    log_resolved("cycle", &doc);
    let (initial, cycle) = cycle_report(&doc)?;
    let report = json!({
        "params": doc.to_patch(),
        "initial": initial,
        "cycle": cycle,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

pub fn cmd_stability(args: &StabilityArgs) -> Result<()> {
    let doc = args.system.resolve(seeded_defaults())?;
    let checks = args.checks.settings()?;
    log_resolved("stability", &doc);
    eprintln!("stability: {}", serde_json::to_string(&checks)?);
    let report = stability_report(&doc, &checks)?;
    let out = json!({
        "params": doc.to_patch(),
        "settings": checks,
        "report": report,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

pub fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec> {
    let doc = args.system.resolve(seeded_defaults())?;
    let InitialPoint::Seed(seed) = doc.initial else {
        bail!("sweep frames derive their initial points from --seed; x0/y0 are not accepted");
    };
    let curve = match (args.from, args.to) {
        (Some(a), Some(b)) => ParameterCurve::Segment {
            from: ParamVector::new(a[0], a[1], a[2], a[3]),
            to: ParamVector::new(b[0], b[1], b[2], b[3]),
        },
        _ => ParameterCurve::Canonical {
            b_prime: doc.system.coupler_d.base,
            r_prime: doc.system.coupler_d.rate,
        },
    };
    let stability = if args.stability {
        Some(args.checks.settings()?)
    } else if args.checks.any_set() {
        bail!("--trials/--threshold/--dilation need --stability");
    } else {
        None
    };
    Ok(SweepSpec {
        curve,
        grid_count: args.grid,
        scheme: doc.system.scheme,
        fx: doc.system.family_f,
        gy: doc.system.family_g,
        n_burn: doc.n_burn,
        m_collect: doc.m_collect,
        seed,
        width: doc.width,
        height: doc.height,
        cycle: doc.cycle,
        enlargement: doc.enlargement,
        png: args.png,
        stability,
    })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let spec = sweep_spec(args)?;
    eprintln!("sweep: resolved {}", serde_json::to_string(&spec)?);
    let manifest = run_sweep(&spec, &args.out, args.jobs)?;
    let cycles = manifest.frames.iter().filter(|f| f.cycle.is_some()).count();
    let unstable = manifest
        .frames
        .iter()
        .filter(|f| f.stability.is_some_and(|s| s.verdict == coupled_core::Verdict::Unstable))
        .count();
    eprintln!(
        "sweep: {} frames ({} cycles, {} flagged unstable) in {}, manifest {}",
        manifest.frames.len(),
        cycles,
        unstable,
        args.out.display(),
        args.out.join(MANIFEST_FILE).display()
    );
    let failed: Vec<String> = manifest
        .failed_frames()
        .map(|f| format!("frame {}: {}", f.index, f.error.as_deref().unwrap_or_default()))
        .collect();
    if !failed.is_empty() {
        bail!("{} frame(s) failed:\n{}", failed.len(), failed.join("\n"));
    }
    Ok(())
}

pub fn cmd_serve(args: &ServeArgs) -> Result<()> {
    let engine = Arc::new(Engine::new());
    if args.stdio {
        eprintln!("serve: speaking the protocol on stdin/stdout");
        return engine
            .serve_stream(std::io::stdin().lock(), std::io::stdout().lock())
            .context("serve over stdio");
    }
    let port = args.port.ok_or_else(|| anyhow!("--port or --stdio is required"))?;
    let listener =
        TcpListener::bind(("127.0.0.1", port)).with_context(|| format!("cannot listen on 127.0.0.1:{port}"))?;
    eprintln!("serve: listening on {}", listener.local_addr()?);
    engine.serve_tcp(listener).context("serve over tcp")
}
