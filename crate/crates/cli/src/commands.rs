use kamscope::class::{classify, repair_to_good_set};
use kamscope::fourier::{io, FourierPotential, OneDProfile, WaveVector};
use kamscope::one_dof::{
    component_graph, critical_band_measure, default_a, energy_of_action, kolmogorov_margin, level_set_measure,
    theta_scale, GridOptions, LevelFunction,
};
use kamscope::random::{sample_indexed, MeasureKind, MeasureSpec};
use kamscope::resonance::{zone_measures, ActionRegion, ZoneConfig, ZoneDecomposition};
use kamscope::survey::{
    nontorus_fraction, scaling_fit, ClassifierSettings, Scheme, SurveyResult, SurveySettings, Verdict,
};
use kamscope::Exec;
use serde_json::json;

use crate::args::*;
use crate::error::{invalid, CliResult};
use crate::output::{num, vector, OutDir};
use crate::source::{self, Loaded, DEFAULT_REPAIR, DEFAULT_SAMPLE};
use crate::svg::{self, Axes, Series};

/// What a command resolved and whether its results meet the quality bar.
pub struct Outcome {
    pub resolved: serde_json::Value,
    pub quality: Result<(), String>,
}

impl Outcome {
    fn ok(resolved: serde_json::Value) -> Self {
        Outcome { resolved, quality: Ok(()) }
    }
}

pub fn run(cmd: &Command, out: &mut OutDir, exec: Exec) -> CliResult<Outcome> {
    match cmd {
        Command::Potential(PotentialCmd::Sample(a)) => potential_sample(a, out),
        Command::Potential(PotentialCmd::Show(a)) => potential_show(a, out),
        Command::Class(ClassCmd::Check(a)) => class_check(a, out, exec),
        Command::Class(ClassCmd::Repair(a)) => class_repair(a, out),
        Command::Zones(a) => zones(a, out, exec),
        Command::Aa(a) => aa(a, out),
        Command::Lemmas(LemmasCmd::Band(a)) => band(a, out),
        Command::Lemmas(LemmasCmd::Level(a)) => level(a, out),
        Command::Survey(a) => survey(a, out, exec),
        Command::Scaling(a) => scaling(a, out, exec),
    }
}

fn mode_rows(f: &FourierPotential) -> Vec<Vec<String>> {
    f.modes()
        .map(|(k, c)| {
            let norm = k.l1();
            vec![
                vector(k.components()),
                norm.to_string(),
                num(c.re),
                num(c.im),
                num(c.norm()),
                num(c.norm() * (norm as f64 * f.width()).exp()),
            ]
        })
        .collect()
}

const MODE_HEADER: [&str; 6] = ["k", "norm", "re", "im", "abs", "weighted"];

fn potential_summary(f: &FourierPotential) -> serde_json::Value {
    json!({
        "n": f.dim(),
        "s": f.width(),
        "tail": f.tail(),
        "k_max": f.k_max(),
        "modes": f.num_modes(),
        "norm_s": f.norm_s(),
    })
}

fn potential_sample(a: &SampleArgs, out: &mut OutDir) -> CliResult<Outcome> {
    let kind = match a.measure {
        Measure::Mu => MeasureKind::MuS,
        Measure::Nu => MeasureKind::NuS,
    };
    let mut spec = MeasureSpec::new(kind, a.n, a.s, a.seed)?;
    if let Some(k) = a.k_max {
        spec = spec.with_k_max(k)?;
    }
    let f = sample_indexed(&spec, a.index)?;
    out.write("potential.json", (io::to_json(&f) + "\n").as_bytes())?;
    out.csv("modes.csv", &MODE_HEADER, mode_rows(&f))?;
    println!("sampled {} modes (k_max {}), |f|_s = {:.6}", f.num_modes(), spec.k_max, f.norm_s());
    Ok(Outcome::ok(json!({ "measure": spec, "index": a.index })))
}

fn potential_show(a: &ShowArgs, out: &mut OutDir) -> CliResult<Outcome> {
    let l = source::load(&a.source, None)?;
    let summary = potential_summary(&l.potential);
    out.json("summary.json", &summary)?;
    out.csv("modes.csv", &MODE_HEADER, mode_rows(&l.potential))?;
    println!("{summary}");
    Ok(Outcome::ok(json!({ "source": l.resolved })))
}

fn check_grid(grid: &[f64]) -> CliResult<()> {
    if grid.is_empty() || grid.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
        return invalid(format!("--delta-grid values must lie in (0, 1), got {grid:?}"));
    }
    Ok(())
}

fn class_check(a: &CheckArgs, out: &mut OutDir, exec: Exec) -> CliResult<Outcome> {
    check_grid(&a.delta_grid)?;
    let mut l = source::load(&a.source, None)?;
    l.config.exec = exec;
    let report = classify(&l.potential, &a.delta_grid, &l.config)?;
    out.json("class_report.json", &report)?;
    out.csv(
        "class_modes.csv",
        &["k", "beta", "critical_points", "min_p3_margin", "p2_pass", "p3_pass"],
        report.modes.iter().map(|m| {
            let margin = m.p3.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
            vec![
                vector(m.k.components()),
                num(m.beta.beta),
                m.critical_points.len().to_string(),
                num(margin),
                m.p2_pass.to_string(),
                m.p3_pass.to_string(),
            ]
        }),
    )?;
    println!(
        "delta = {}: {} (P1 {}, P2 failures {}, P3 failures {}, |f|_s = {:.4})",
        report.delta,
        if report.verdict { "in class" } else { "not in class" },
        if report.p1.pass { "pass" } else { "fail" },
        report.p2_failures(),
        report.p3_failures(),
        report.norm_s
    );
    Ok(Outcome::ok(json!({ "source": l.resolved, "delta_grid": a.delta_grid, "config": l.config })))
}

fn class_repair(a: &RepairArgs, out: &mut OutDir) -> CliResult<Outcome> {
    if !(a.theta > 0.0 && a.theta < 1.0) {
        return invalid(format!("--theta must lie in (0, 1), got {}", a.theta));
    }
    let l = source::load(&a.source, None)?;
    let r = repair_to_good_set(&l.potential, a.theta, &l.config)?;
    out.write("repaired.json", (io::to_json(&r.potential) + "\n").as_bytes())?;
    out.json("repair.json", &r)?;
    out.csv(
        "repair_modes.csv",
        &["k", "before_re", "before_im", "after_re", "after_im", "change", "curve_distance"],
        r.moved.iter().map(|m| {
            vec![
                vector(m.k.components()),
                num(m.before.re),
                num(m.before.im),
                num(m.after.re),
                num(m.after.im),
                num(m.change),
                num(m.curve_distance),
            ]
        }),
    )?;
    println!("moved {} modes, lifted {}, max weighted change {:.4} (delta = {})", r.moved.len(), r.lifted.len(), r.max_change, r.delta);
    Ok(Outcome::ok(json!({ "source": l.resolved, "theta": a.theta, "config": l.config })))
}

fn zone_config(k: &ZoneKnobs, base: ZoneConfig) -> ZoneConfig {
    ZoneConfig {
        mode_exponent: k.mode_exponent.unwrap_or(base.mode_exponent),
        width_exponent: k.width_exponent.or(base.width_exponent),
        ..base
    }
}

fn region(r: &RegionArgs, n: usize) -> CliResult<ActionRegion> {
    match r.region[..] {
        [lo, hi] => Ok(ActionRegion::cube(n, lo, hi)?),
        _ => invalid("--region takes LO,HI"),
    }
}

fn zones(a: &ZonesArgs, out: &mut OutDir, exec: Exec) -> CliResult<Outcome> {
    let cfg = zone_config(&a.zones, ZoneConfig::default());
    let b = region(&a.region, a.n)?;
    let z = ZoneDecomposition::new(a.eps, a.n, &cfg)?;
    let m = zone_measures(&z, &b, a.samples, a.seed, exec)?;
    out.json("zones.json", &json!({ "epsilon": a.eps, "modes": z.modes.len(), "width": z.width, "measures": m }))?;
    out.csv("zone_modes.csv", &["k", "norm"], z.modes.iter().map(|k| vec![vector(k.components()), k.l1().to_string()]))?;
    println!(
        "{} resonant modes, half-width {:.4e}: B0 {:.4} B1 {:.4} B2 {:.4}",
        z.modes.len(),
        z.width,
        m.b0.estimate,
        m.b1.estimate,
        m.b2.estimate
    );
    Ok(Outcome::ok(json!({ "zones": cfg, "width_exponent": cfg.width_exponent_for(a.n), "region": b })))
}

fn profile_of(p: &ProfileArgs) -> CliResult<(FourierPotential, OneDProfile)> {
    let f = io::load(&p.profile_of)?;
    if p.mode.len() != f.dim() {
        return invalid(format!("--mode needs {} components, got {}", f.dim(), p.mode.len()));
    }
    let prof = f.profile(&WaveVector::new(p.mode.clone()))?;
    Ok((f, prof))
}

fn aa(a: &AaArgs, out: &mut OutDir) -> CliResult<Outcome> {
    let (f, prof) = profile_of(&a.profile)?;
    let opts = GridOptions { interior: a.interior, min_depth: a.min_depth, max_depth: a.max_depth, ..GridOptions::default() };
    let comps = component_graph(&prof)?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut margins = Vec::new();
    let mut profiles = Vec::new();
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let (theta, a_used) = match a.eps {
        Some(eps) => {
            let a_used = match a.a {
                Some(v) => v,
                None => default_a(eps)?,
            };
            (Some(theta_scale(eps, a_used)?), Some(a_used))
        }
        None => (None, None),
    };
    for c in &comps {
        let p = energy_of_action(&prof, c, &opts)?;
        for pt in &p.points {
            rows.push(vec![
                c.id.to_string(),
                format!("{:?}", c.kind).to_lowercase(),
                num(pt.action),
                num(pt.energy),
                num(pt.omega),
                num(pt.e2),
                num(pt.period),
                pt.valid.to_string(),
            ]);
        }
        series.push(Series {
            label: format!("component {}", c.id),
            color: colors[c.id % colors.len()],
            points: p.valid_points().map(|pt| (pt.action, pt.energy)).collect(),
        });
        if let Some(th) = theta {
            margins.push(kolmogorov_margin(&p, th, a.c)?);
        }
        profiles.push(json!({ "component": c, "p_a": p.p_a, "p_b": p.p_b, "valid_lo": p.valid_lo, "valid_hi": p.valid_hi }));
    }
    out.csv("aa.csv", &["component", "kind", "p", "E", "omega", "E2", "period", "valid"], rows)?;
    out.json("aa_components.json", &profiles)?;
    let axes = Axes {
        title: format!("E(p) for mode {}", vector(&a.profile.mode)),
        xlabel: "action p".into(),
        ylabel: "energy E".into(),
        log_x: false,
        log_y: false,
    };
    out.write("aa.svg", svg::lines(&axes, &series).as_bytes())?;
    let mut quality = Ok(());
    if theta.is_some() {
        out.csv(
            "kolmogorov.csv",
            &["component", "theta", "threshold", "bad_measure", "valid_measure", "pass"],
            margins.iter().zip(&comps).map(|(m, c)| {
                vec![c.id.to_string(), num(m.theta), num(m.threshold), num(m.bad_measure), num(m.valid_measure), m.pass.to_string()]
            }),
        )?;
        if margins.iter().any(|m| !m.pass) {
            quality = Err("Kolmogorov margin fails on some component".to_string());
        }
    }
    println!("{} components tabulated for mode {}", comps.len(), vector(&a.profile.mode));
    Ok(Outcome {
        resolved: json!({ "grid": opts, "potential_sha256": source::hash(&f), "theta": theta, "a": a_used, "c": a.c }),
        quality,
    })
}

fn check_thetas(t: &[f64]) -> CliResult<()> {
    if t.is_empty() || t.iter().any(|v| !(*v > 0.0 && *v < 1.0 / std::f64::consts::E)) {
        return invalid(format!("--theta values must lie in (0, 1/e), got {t:?}"));
    }
    Ok(())
}

fn band(a: &BandArgs, out: &mut OutDir) -> CliResult<Outcome> {
    check_thetas(&a.theta)?;
    let (f, prof) = profile_of(&a.profile)?;
    let energies = match a.e0 {
        Some(e) => vec![e],
        None => {
            let mut e: Vec<f64> = kamscope::class::critical_points(&prof, &Default::default())?.iter().map(|c| c.value).collect();
            e.sort_by(f64::total_cmp);
            e.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
            if e.is_empty() {
                e.push(0.0);
            }
            e
        }
    };
    let mut rows = Vec::new();
    for &e0 in &energies {
        for &th in &a.theta {
            let m = critical_band_measure(&prof, e0, th)?;
            rows.push(vec![num(e0), num(th), num(m.measure), num(m.error), num(m.measure / (th * th.ln().abs()))]);
        }
    }
    out.csv("band.csv", &["e0", "theta", "measure", "error", "measure_over_theta_log_theta"], rows)?;
    println!("band measures for {} critical energies", energies.len());
    Ok(Outcome::ok(json!({ "e0": energies, "potential_sha256": source::hash(&f) })))
}

fn level(a: &LevelArgs, out: &mut OutDir) -> CliResult<Outcome> {
    check_thetas(&a.theta)?;
    if a.poly.is_empty() {
        return invalid("--poly needs at least one coefficient");
    }
    if !(a.x1 < a.x2) {
        return invalid(format!("need x1 < x2, got [{}, {}]", a.x1, a.x2));
    }
    let g = LevelFunction::Polynomial(a.poly.clone());
    let rows = a
        .theta
        .iter()
        .map(|&th| Ok(vec![num(th), num(level_set_measure(&g, a.x1, a.x2, th)?)]))
        .collect::<CliResult<Vec<_>>>()?;
    out.csv("level.csv", &["theta", "measure"], rows)?;
    Ok(Outcome::ok(json!({ "interval": [a.x1, a.x2] })))
}

fn survey_settings(k: &SurveyKnobs) -> CliResult<SurveySettings> {
    let base = SurveySettings::default();
    let c = base.classifier;
    let classifier = ClassifierSettings {
        dt: k.dt.unwrap_or(c.dt),
        scheme: match k.scheme {
            Some(SchemeArg::Leapfrog) => Scheme::Leapfrog,
            Some(SchemeArg::Yoshida4) => Scheme::Yoshida4,
            None => c.scheme,
        },
        window: k.window.unwrap_or(c.window),
        window_periods: k.window_periods.unwrap_or(c.window_periods),
        max_doublings: k.max_doublings.unwrap_or(c.max_doublings),
        tol_c: k.tol_c.unwrap_or(c.tol_c),
        escalation: k.escalation.unwrap_or(c.escalation),
        energy_tol: k.energy_tol.unwrap_or(c.energy_tol),
        ..c
    };
    classifier.validate()?;
    let s = SurveySettings {
        classifier,
        zones: zone_config(&k.zones, base.zones),
        undecided_limit: k.undecided_limit.unwrap_or(base.undecided_limit),
    };
    if !(s.undecided_limit > 0.0 && s.undecided_limit <= 1.0) {
        return invalid(format!("--undecided-limit must lie in (0, 1], got {}", s.undecided_limit));
    }
    Ok(s)
}

struct SurveyInputs {
    loaded: Loaded,
    report: kamscope::class::ClassReport,
    region: ActionRegion,
    settings: SurveySettings,
}

fn survey_inputs(k: &SurveyKnobs) -> CliResult<SurveyInputs> {
    check_grid(&k.delta_grid)?;
    let settings = survey_settings(k)?;
    let loaded = source::load(&k.source, Some((DEFAULT_SAMPLE, DEFAULT_REPAIR)))?;
    let report = source::report(&loaded, &k.delta_grid)?;
    let region = region(&k.region, loaded.potential.dim())?;
    Ok(SurveyInputs { loaded, report, region, settings })
}

fn resolved_survey(inp: &SurveyInputs, k: &SurveyKnobs) -> serde_json::Value {
    json!({
        "source": inp.loaded.resolved,
        "class_delta": inp.report.delta,
        "class_config": inp.loaded.config,
        "region": inp.region,
        "orbits": k.orbits,
        "seed": k.seed,
        "settings": inp.settings,
        "width_exponent": inp.settings.zones.width_exponent_for(inp.loaded.potential.dim()),
    })
}

fn orbit_rows(r: &SurveyResult) -> Vec<Vec<String>> {
    r.orbits
        .iter()
        .map(|o| {
            vec![
                o.index.to_string(),
                vector(&o.y0.iter().map(|v| num(*v)).collect::<Vec<_>>()),
                vector(&o.x0.iter().map(|v| num(*v)).collect::<Vec<_>>()),
                o.verdict.label().to_string(),
                num(o.drift),
                num(o.energy_drift),
                o.zone.clone(),
                vector(&o.winding.iter().map(|v| num(*v)).collect::<Vec<_>>()),
                o.locked.to_string(),
                o.note.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

const ORBIT_HEADER: [&str; 10] = ["index", "y0", "x0", "verdict", "drift", "energy_drift", "zone", "winding", "locked", "note"];

fn verdict_plot(r: &SurveyResult) -> String {
    let pick = |v: Verdict| -> Vec<(f64, f64)> {
        r.orbits.iter().filter(|o| o.verdict == v && o.y0.len() >= 2).map(|o| (o.y0[0], o.y0[1])).collect()
    };
    let series = [
        Series { label: "torus".into(), color: "#9ecae1", points: pick(Verdict::Torus) },
        Series { label: "undecided".into(), color: "#fd8d3c", points: pick(Verdict::Undecided) },
        Series { label: "non-torus".into(), color: "#d62728", points: pick(Verdict::NonTorus) },
    ];
    let axes = Axes {
        title: format!("verdicts at eps = {:e}", r.epsilon),
        xlabel: "y1".into(),
        ylabel: "y2".into(),
        log_x: false,
        log_y: false,
    };
    svg::scatter(&axes, &series)
}

fn summary_text(r: &SurveyResult) -> String {
    let p = |x: &kamscope::numeric::stats::Proportion| format!("{:.5} [{:.5}, {:.5}] ({})", x.estimate, x.lo, x.hi, x.count);
    let mut s = format!(
        "epsilon: {:e}\nsamples: {}\ntorus: {}\nnon_torus: {}\nundecided: {}\noff_torus: {}\nquotable: {}\nwindow: {}\ntol_freq: {:e}\n",
        r.epsilon,
        r.samples,
        p(&r.torus),
        p(&r.non_torus),
        p(&r.undecided),
        p(&r.off_torus()),
        r.quotable,
        r.window,
        r.tol_freq
    );
    for z in &r.zones {
        s += &format!("zone {}: orbits {} torus {} non_torus {} undecided {}\n", z.zone, z.orbits, z.torus, z.non_torus, z.undecided);
    }
    s
}

fn survey(a: &SurveyArgs, out: &mut OutDir, exec: Exec) -> CliResult<Outcome> {
    let inp = survey_inputs(&a.knobs)?;
    let r = nontorus_fraction(&inp.loaded.potential, &inp.report, a.eps, &inp.region, a.knobs.orbits, a.knobs.seed, &inp.settings, exec)?;
    out.csv("orbits.csv", &ORBIT_HEADER, orbit_rows(&r))?;
    out.json("survey.json", &SurveyResult { orbits: Vec::new(), ..r.clone() })?;
    let text = summary_text(&r);
    out.write("summary.txt", text.as_bytes())?;
    if !a.knobs.no_svg {
        out.write("verdicts.svg", verdict_plot(&r).as_bytes())?;
    }
    print!("{text}");
    let quality = if r.quotable {
        Ok(())
    } else {
        Err(format!("undecided fraction {:.3} exceeds the limit {}", r.undecided.estimate, inp.settings.undecided_limit))
    };
    Ok(Outcome { resolved: json!({ "eps": a.eps, "survey": resolved_survey(&inp, &a.knobs) }), quality })
}

fn scaling(a: &ScalingArgs, out: &mut OutDir, exec: Exec) -> CliResult<Outcome> {
    if a.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return invalid(format!("--eps values must lie in (0, 1), got {:?}", a.eps));
    }
    // the fit's own precondition, checked before hours of surveys
    let (lo, hi) = a.eps.iter().fold((f64::MAX, f64::MIN), |(l, h), &e| (l.min(e), h.max(e)));
    if a.eps.len() < 3 || (hi / lo).log10() < 1.5 - 1e-9 {
        return invalid(format!("--eps needs at least three values spanning 1.5 decades, got {:?}", a.eps));
    }
    let inp = survey_inputs(&a.knobs)?;
    let mut results = Vec::new();
    for (i, &eps) in a.eps.iter().enumerate() {
        let r = nontorus_fraction(&inp.loaded.potential, &inp.report, eps, &inp.region, a.knobs.orbits, a.knobs.seed, &inp.settings, exec)?;
        out.csv(&format!("orbits_{i}.csv"), &ORBIT_HEADER, orbit_rows(&r))?;
        eprintln!("eps = {eps:e}: off-torus {:.5}", r.off_torus().estimate);
        results.push(r);
    }
    out.csv(
        "scaling.csv",
        &["eps", "samples", "non_torus", "undecided", "off_torus", "lo", "hi", "quotable"],
        results.iter().map(|r| {
            let p = r.off_torus();
            vec![
                num(r.epsilon),
                r.samples.to_string(),
                r.non_torus.count.to_string(),
                r.undecided.count.to_string(),
                num(p.estimate),
                num(p.lo),
                num(p.hi),
                r.quotable.to_string(),
            ]
        }),
    )?;
    let fit = scaling_fit(&results);
    let mut text: String = results.iter().map(summary_text).collect::<Vec<_>>().join("\n");
    let quality = match &fit {
        Ok(f) => {
            out.json("fit.json", f)?;
            text += &format!(
                "\nfit: log m = alpha log eps + beta log|ln eps| + gamma\nalpha: {:.4} +/- {:.4}\nbeta: {:.4} +/- {:.4}\ngamma: {:.4} +/- {:.4}\nreduced alpha (beta = 0): {:.4} +/- {:.4}\n",
                f.alpha, f.alpha_se, f.beta, f.beta_se, f.gamma, f.gamma_se, f.reduced_alpha, f.reduced_alpha_se
            );
            for h in &f.hypotheses {
                text += &format!("hypothesis alpha = {}: z = {:.2}\n", h.alpha, h.z);
            }
            Ok(())
        }
        Err(e) => {
            text += &format!("\nfit: not available ({e})\n");
            Err(format!("scaling fit failed: {e}"))
        }
    };
    out.write("summary.txt", text.as_bytes())?;
    let series: Vec<Series> = vec![Series {
        label: "off-torus".into(),
        color: "#d62728",
        points: results.iter().map(|r| (r.epsilon, r.off_torus().estimate)).collect(),
    }];
    let axes = Axes { title: "off-torus fraction".into(), xlabel: "eps".into(), ylabel: "fraction".into(), log_x: true, log_y: true };
    out.write("scaling.svg", svg::lines(&axes, &series).as_bytes())?;
    print!("{text}");
    Ok(Outcome { resolved: json!({ "eps": a.eps, "survey": resolved_survey(&inp, &a.knobs) }), quality })
}
