//! The six batch commands. Each returns its outputs in memory; the caller
//! writes them only after the whole computation succeeded.

use serde_json::{json, Value};

use super::config::{ResonanceSource, RunConfig};
use super::output::{Cell, Outputs, Table};
use super::Failure;
use crate::error::Error;
use crate::photo::{
    channel_delay, continuum_extent, dipole_scan, find_cooper_minimum, log_slope, photodetachment_cross_section,
    threshold_exponent_fit,
};
use crate::potential::effective_curve;
use crate::radialsolver::{find_bound_states, find_bound_states_with, BoundSearchOptions};
use crate::resonance::{classify, decompose_phase, fano_eval, fano_fit, identity_sides, FitReport};
use crate::scattering::{cross_section, partial_cross_section, phase_scan, PhaseShiftCurve};
use crate::timedelay::{causality_bound, causality_check, delay_structure_scan, time_delay, DelayMode};
use crate::wkb::{barrier_segment, barrier_top, traversal_time, tunneling_probability};

fn need<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
    section.as_ref().ok_or_else(|| Failure::Config(format!("config: missing [{name}] section")))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn scan_curves(cfg: &RunConfig, ells: &[u32]) -> Result<Vec<PhaseShiftCurve>, Failure> {
    let scan = need(&cfg.scan, "scan")?;
    let energies = scan.energies.points();
    Ok(ells.iter().map(|&l| phase_scan(&cfg.potential, l, &energies, &cfg.grid)).collect::<Result<Vec<_>, _>>()?)
}

pub fn scan(cfg: &RunConfig) -> Result<Outputs, Failure> {
    let scan = need(&cfg.scan, "scan")?;
    let curves = scan_curves(cfg, &scan.ells)?;
    let mut out = Outputs::default();
    let mut summary = Vec::new();
    for c in &curves {
        let mut t = Table::new(
            format!("phase_l{}", c.ell),
            &[("E", "hartree"), ("k", "1/bohr"), ("delta", "rad"), ("sigma_partial", "bohr^2")],
        )
        .comment(format!("phase shift, ell = {}", c.ell));
        for (&e, &d) in c.energies.iter().zip(&c.deltas) {
            let k = (2.0 * e).sqrt();
            t.push(vec![e.into(), k.into(), d.into(), partial_cross_section(c.ell, k, d).into()]);
        }
        summary.push(json!({"ell": c.ell, "energies": c.energies, "delta": c.deltas}));
        out.table(t);
    }
    let mut cols: Vec<(String, String)> = vec![("E".into(), "hartree".into()), ("sigma_total".into(), "bohr^2".into())];
    cols.extend(scan.ells.iter().map(|l| (format!("sigma_l{l}"), "bohr^2".to_string())));
    let col_refs: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let mut total = Table::new("cross_section", &col_refs).comment("sum over the scanned partial waves");
    for e in scan.energies.points() {
        let cs = cross_section(&curves, e)?;
        let mut row: Vec<Cell> = vec![e.into(), cs.sigma_total.into()];
        row.extend(cs.sigma_partial.iter().map(|&s| Cell::Num(s)));
        total.push(row);
    }
    out.table(total);
    out.document("scan", json!({"curves": summary}));
    Ok(out)
}

pub fn bound(cfg: &RunConfig) -> Result<Outputs, Failure> {
    let b = need(&cfg.bound, "bound")?;
    let mut t = Table::new("bound_states", &[("ell", "-"), ("n_radial", "-"), ("energy", "hartree")])
        .comment(format!("window [{}, {}] hartree", b.window.0, b.window.1));
    let mut list = Vec::new();
    for &l in &b.ells {
        for st in find_bound_states(&cfg.potential, l, b.window, b.n_max)? {
            t.push(vec![Cell::Text(l.to_string()), Cell::Text(st.n_radial.to_string()), st.energy.into()]);
            list.push(json!({"ell": l, "n_radial": st.n_radial, "energy": st.energy}));
        }
    }
    let mut out = Outputs::default();
    out.table(t);
    out.document("bound_states", json!({"window": [b.window.0, b.window.1], "states": list}));
    Ok(out)
}

fn structure_failure(e: Error) -> Failure {
    match e {
        Error::InsufficientRise { .. } | Error::InsufficientData { .. } => {
            Failure::Numerical(format!("resonance: no resonant structure detected ({e})"))
        }
        other => other.into(),
    }
}

pub fn resonance(cfg: &RunConfig) -> Result<Outputs, Failure> {
    let r = need(&cfg.resonance, "resonance")?;
    let energies = need(&cfg.scan, "scan")?.energies.points();
    let window = r.window.unwrap_or((energies[0], energies[energies.len() - 1]));
    let mut out = Outputs::default();
    let (data, decomposition, label) = match &r.source {
        ResonanceSource::Synthetic(p) => {
            let data: Vec<(f64, f64)> = energies.iter().map(|&e| (e, fano_eval(p, e))).collect();
            (data, Value::Null, Value::Null)
        }
        ResonanceSource::Computed => {
            let curve = phase_scan(&cfg.potential, r.ell, &energies, &cfg.grid)?;
            let dec = decompose_phase(&curve, window).map_err(structure_failure)?;
            let pd = &dec.decomposition;
            let mut t = Table::new(
                "decomposition",
                &[
                    ("E", "hartree"),
                    ("delta", "rad"),
                    ("delta_a", "rad"),
                    ("delta_b", "rad"),
                    ("lhs", "-"),
                    ("rhs", "-"),
                ],
            )
            .comment(format!("background and resonant phase, ell = {}", r.ell));
            for i in 0..pd.energies.len() {
                let (a, b) = (pd.delta_a[i], pd.delta_b[i]);
                let (lhs, rhs) = identity_sides(a, b);
                t.push(vec![pd.energies[i].into(), (a + b).into(), a.into(), b.into(), lhs.into(), rhs.into()]);
            }
            out.table(t);
            let curve_eff = effective_curve(&cfg.potential, r.ell, &cfg.grid)?;
            let label = classify(&curve_eff, dec.e_r).map_or(Value::Null, |s| Value::String(s.into()));
            let data = curve
                .energies
                .iter()
                .zip(&curve.deltas)
                .filter(|(e, _)| **e >= window.0 && **e <= window.1)
                .map(|(&e, &d)| (e, partial_cross_section(r.ell, (2.0 * e).sqrt(), d)))
                .collect();
            let summary = json!({
                "E_r": dec.e_r,
                "Gamma": dec.gamma,
                "background_residual": dec.background_residual,
                "identity_residual": pd.identity_residual(),
            });
            (data, summary, label)
        }
    };
    let fit = fano_fit(&data, Some(window)).map_err(structure_failure)?;
    let mut t = Table::new("fano", &[("E", "hartree"), ("sigma", "bohr^2"), ("sigma_fit", "bohr^2")])
        .comment("cross section and fitted Fano profile");
    for &(e, s) in &data {
        t.push(vec![e.into(), s.into(), fano_eval(&fit.params, e).into()]);
    }
    out.table(t);
    out.document(
        "resonance",
        json!({
            "ell": r.ell,
            "window": [window.0, window.1],
            "fit": to_value(&FitReport::from(&fit)),
            "zero_energy": fit.params.zero_energy(),
            "decomposition": decomposition,
            "label": label,
            "large_q": r.large_q,
            "breit_wigner_limit": fit.params.q.abs() > r.large_q,
        }),
    );
    Ok(out)
}

pub fn delay(cfg: &RunConfig) -> Result<Outputs, Failure> {
    let d = need(&cfg.delay, "delay")?;
    let curves = scan_curves(cfg, &d.ells)?;
    let mut out = Outputs::default();
    let mut docs = Vec::new();
    for c in &curves {
        let tdc = time_delay(c, d.mode)?;
        let check_range = d.range.filter(|_| d.mode == DelayMode::FullScattering);
        let mut cols = vec![("E", "hartree"), ("tau_au", "a.u."), ("tau_as", "attosecond"), ("mode", "-")];
        if check_range.is_some() {
            cols.push(("causality_bound", "a.u."));
        }
        let mut t = Table::new(format!("delay_l{}", c.ell), &cols).comment(format!("time delay, ell = {}", c.ell));
        for ((&e, &tau), tas) in tdc.energies.iter().zip(&tdc.tau).zip(tdc.tau_attosec()) {
            let mut row = vec![e.into(), tau.into(), tas.into(), Cell::Text(d.mode.label().into())];
            if let Some(range) = check_range {
                row.push(causality_bound(range, e).into());
            }
            t.push(row);
        }
        out.table(t);
        let causality = match check_range {
            Some(range) => to_value(&causality_check(&tdc, range)?),
            None => Value::Null,
        };
        docs.push(json!({
            "ell": c.ell,
            "mode": d.mode.label(),
            "integral": tdc.integral(),
            "causality": causality,
            "features": to_value(&delay_structure_scan(&tdc)?),
        }));
    }
    out.document("delay", json!({"channels": docs}));
    Ok(out)
}

pub fn photo(cfg: &RunConfig) -> Result<Outputs, Failure> {
    let p = need(&cfg.photo, "photo")?;
    let spec = &cfg.potential;
    let opts = BoundSearchOptions::with_step(p.step);
    let states = find_bound_states_with(spec, p.ell, (p.bound_e_min, -1e-4), 64, &opts)?;
    let initial = states
        .into_iter()
        .find(|s| s.n_radial == p.nodes)
        .ok_or(Error::MissingBoundState { ell: p.ell, nodes: p.nodes })?;
    let e_low = p.energies.e_min.min(p.threshold.e_min);
    let grid = cfg.grid.extended(continuum_extent(spec, e_low));
    let energies = p.energies.points();
    let pd = photodetachment_cross_section(&initial, spec, &energies, &grid)?;

    let mut out = Outputs::default();
    let mut channels = Vec::new();
    let mut any_minimum = false;
    for scan in &pd.channels {
        let l = scan.final_ell;
        let mut t = Table::new(
            format!("photo_l{l}"),
            &[("E", "hartree"), ("omega", "hartree"), ("D", "a.u."), ("sigma_partial", "bohr^2")],
        )
        .comment(format!("ell = {} nodes = {} -> ell' = {l}", p.ell, p.nodes));
        for i in 0..scan.energies.len() {
            t.push(vec![
                scan.energies[i].into(),
                scan.photon_energies[i].into(),
                scan.d_values[i].into(),
                scan.sigma_partial[i].into(),
            ]);
        }
        out.table(t);

        let near = dipole_scan(&initial, spec, l, &p.threshold.points(), &grid)?;
        let threshold = threshold_exponent_fit(&near, p.threshold_decades, l)?;
        let (cooper, features) = match find_cooper_minimum(scan) {
            Ok(cm) => {
                any_minimum = true;
                let tdc = channel_delay(scan, Some(&cm), &grid)?;
                let mut t = Table::new(
                    format!("delay_cooper_l{l}"),
                    &[("E", "hartree"), ("tau_au", "a.u."), ("tau_as", "attosecond"), ("mode", "-")],
                )
                .comment(format!("photoelectron delay in the ell' = {l} channel"));
                for ((&e, &tau), tas) in tdc.energies.iter().zip(&tdc.tau).zip(tdc.tau_attosec()) {
                    t.push(vec![e.into(), tau.into(), tas.into(), Cell::Text(tdc.mode.label().into())]);
                }
                out.table(t);
                (to_value(&cm), to_value(&delay_structure_scan(&tdc)?))
            }
            Err(Error::NoCooperMinimum) => (Value::String("no Cooper minimum".into()), Value::Array(Vec::new())),
            Err(e) => return Err(e.into()),
        };
        channels.push(json!({
            "final_ell": l,
            "cooper_minimum": cooper,
            "threshold_fit": to_value(&threshold),
            "d_threshold": near.d_values[0],
            "delay_features": features,
        }));
    }
    let mut total = Table::new("photo_total", &[("E", "hartree"), ("sigma_total", "bohr^2")]);
    for (&e, &s) in energies.iter().zip(&pd.sigma_total) {
        total.push(vec![e.into(), s.into()]);
    }
    out.table(total);
    out.document(
        "photo",
        json!({
            "initial": {"ell": initial.ell, "nodes": initial.n_radial, "energy": initial.energy},
            "channels": channels,
            "summary": if any_minimum { "Cooper minimum found" } else { "no Cooper minimum" },
        }),
    );
    Ok(out)
}

pub fn wkb(cfg: &RunConfig) -> Result<Outputs, Failure> {
    let w = need(&cfg.wkb, "wkb")?;
    let curve = effective_curve(&cfg.potential, w.ell, &cfg.grid)?;
    let top = barrier_top(&curve)?;
    let mut energies = w.energies.clone();
    energies.extend(w.fractions.iter().map(|f| f * top.value));
    let mut t = Table::new(
        "wkb",
        &[
            ("E", "hartree"),
            ("status", "-"),
            ("r_inner", "bohr"),
            ("r_outer", "bohr"),
            ("action", "-"),
            ("T", "-"),
            ("traversal_au", "a.u."),
            ("traversal_as", "attosecond"),
        ],
    )
    .comment(format!("ell = {}, barrier top {} hartree at r = {} bohr", w.ell, top.value, top.r));
    let mut rows = Vec::new();
    for &e in &energies {
        match barrier_segment(&curve, e) {
            Ok(seg) => {
                let tt = traversal_time(&seg);
                let tp = tunneling_probability(&seg);
                t.push(vec![
                    e.into(),
                    "ok".into(),
                    seg.r_inner.into(),
                    seg.r_outer.into(),
                    seg.action.into(),
                    tp.into(),
                    tt.time_au.into(),
                    tt.time_attosec.into(),
                ]);
                rows.push(json!({"E": e, "status": "ok", "action": seg.action, "T": tp, "traversal_attosec": tt.time_attosec}));
            }
            Err(Error::NoBarrier { .. }) => {
                let mut row = vec![e.into(), "no barrier".into()];
                row.extend((0..6).map(|_| Cell::Num(f64::NAN)));
                t.push(row);
                rows.push(json!({"E": e, "status": "no barrier"}));
            }
            Err(err) => return Err(err.into()),
        }
    }
    let n = w.k_points;
    let ks: Vec<f64> = (0..n).map(|i| w.k_min * 10f64.powf(i as f64 / (n - 1) as f64)).collect();
    let mut kt = Table::new("wkb_threshold", &[("k", "1/bohr"), ("E", "hartree"), ("T", "-")]);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &k in &ks {
        let e = 0.5 * k * k;
        let tp = tunneling_probability(&barrier_segment(&curve, e)?);
        kt.push(vec![k.into(), e.into(), tp.into()]);
        xs.push(k.ln());
        ys.push(tp.ln());
    }
    let (slope, stderr) = log_slope(&xs, &ys)?;
    let expected = 2.0 * w.ell as f64 + 1.0;
    out_summary(slope, expected);
    let mut out = Outputs::default();
    out.table(t);
    out.table(kt);
    out.document(
        "wkb",
        json!({
            "ell": w.ell,
            "barrier_top": {"r": top.r, "value": top.value},
            "inner_minimum": to_value(&curve.inner_minimum),
            "barrier_feature": to_value(&curve.barrier),
            "rows": rows,
            "threshold": {
                "k_range": [ks[0], ks[n - 1]],
                "slope": slope,
                "stderr": stderr,
                "expected": expected,
                "relative_error": (slope / expected - 1.0).abs(),
            },
        }),
    );
    Ok(out)
}

fn out_summary(slope: f64, expected: f64) {
    println!("T(k) log-log slope {slope:.4} vs 2l+1 = {expected} ({:.2}% off)", 100.0 * (slope / expected - 1.0).abs());
}
