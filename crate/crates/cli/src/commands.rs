//! One runner per experiment command. Each returns the assembled report and
//! the CSV table body; the caller writes files and maps pass/fail to the
//! exit code.

use num_complex::Complex64;
use serde_json::json;

use hdist_core::decomp::{
    build_partition, check_fractional, check_hm_classical, cz_decompose, default_theta_seed,
    DiffScheme, FractionalOptions,
};
use hdist_core::grid::{lp_norm, multi_indices, GridFunction};
use hdist_core::hdist::{
    divcurl_check, evaluate_hdist, localization_residual, oscillation_oracle, EvalOptions,
};
use hdist_core::multiplier::{estimate_op_norm, extend_symbol};

use crate::config::{
    body_as, CommutatorConfig, CzConfig, DivcurlConfig, HdistConfig, LocalizationConfig,
    NormSweepConfig, PartitionCheckConfig, RawConfig, SequenceSpecConfig, SymbolCheckConfig,
    SymbolCheckMode,
};
use crate::report::{json_complex, json_f64, json_object, Check, Report};

pub type CommandOutput = (Report, String);

fn core_err(e: hdist_core::Error) -> String {
    e.to_string()
}

pub fn run_partition_check(raw: &RawConfig) -> Result<CommandOutput, String> {
    let cfg: PartitionCheckConfig = body_as(raw)?;
    if !(1..=3).contains(&cfg.grid.dim) {
        return Err(format!("grid.dim = {} out of range", cfg.grid.dim));
    }
    let partition =
        build_partition(default_theta_seed(), cfg.j_min, cfg.j_max).map_err(core_err)?;
    let (lo, hi) = partition.covered_annulus();
    let mut csv = String::from("r,partition_sum,deviation\n");
    let mut max_dev = 0.0f64;
    for i in 0..cfg.samples {
        // log-spaced radii over the covered annulus; directions are
        // irrelevant for a radial seed but exercised through the vector path
        let r = lo * (hi / lo).powf((i as f64 + 0.5) / cfg.samples as f64);
        let angle = 2.399963229728653 * i as f64; // golden angle sweep
        let sum = match cfg.grid.dim {
            1 => {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let xi = [sign * r];
                (cfg.j_min..=cfg.j_max)
                    .map(|j| {
                        partition.theta(&[xi[0] * (-j as f64).exp2()])
                    })
                    .sum::<f64>()
            }
            _ => {
                let xi = [r * angle.cos(), r * angle.sin(), 0.0];
                (cfg.j_min..=cfg.j_max)
                    .map(|j| {
                        let s = (-j as f64).exp2();
                        partition.theta(&[xi[0] * s, xi[1] * s, xi[2] * s][..cfg.grid.dim])
                    })
                    .sum::<f64>()
            }
        };
        let dev = (sum - 1.0).abs();
        max_dev = max_dev.max(dev);
        if i % (cfg.samples / 64).max(1) == 0 {
            csv.push_str(&format!("{},{},{}\n", r, sum, dev));
        }
    }
    let checks = vec![Check::upper("partition_of_unity", max_dev, cfg.tolerance)];
    let results = json_object(vec![
        ("max_deviation", json_f64(max_dev)),
        ("covered_annulus", json!([lo, hi])),
    ]);
    let tolerances = json!({ "tolerance": cfg.tolerance });
    Ok((
        Report::new("partition-check", &raw.hash, None, tolerances, checks, results),
        csv,
    ))
}

pub fn run_symbol_check(raw: &RawConfig) -> Result<CommandOutput, String> {
    let cfg: SymbolCheckConfig = body_as(raw)?;
    let dim = cfg.grid.dim;
    let symbol = cfg.symbol.build(dim)?;
    let rd = extend_symbol(&symbol);
    let mut checks = Vec::new();
    let mut csv = String::from("scale,lhs,rhs_factor,ratio,label\n");
    let results;
    match cfg.mode {
        SymbolCheckMode::Classical => {
            let exps = cfg.r_exponents.clone().unwrap_or_else(|| (-4..=4).collect());
            let radii: Vec<f64> = exps.iter().map(|&e| (e as f64).exp2()).collect();
            let report = check_hm_classical(
                &rd,
                cfg.kappa as usize,
                &radii,
                DiffScheme::default(),
                cfg.constant_cap,
            )
            .map_err(core_err)?;
            for row in &report.per_scale_table {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.scale, row.lhs, row.rhs_factor, row.ratio, row.label
                ));
            }
            checks.push(Check::flag(
                "condition_passed",
                report.passed,
                report.notes.join("; "),
            ));
            let spread = per_group_spread(
                report
                    .per_scale_table
                    .iter()
                    .map(|r| (r.label.clone(), r.ratio)),
            );
            checks.push(Check::upper("per_scale_spread", spread, cfg.max_spread));
            results = json_object(vec![
                ("kind", json!(report.kind.as_str())),
                ("constant_estimate", json_f64(report.constant_estimate)),
                ("notes", json!(report.notes)),
            ]);
        }
        SymbolCheckMode::Fractional => {
            let partition = build_partition(default_theta_seed(), -24, 24).map_err(core_err)?;
            let j_min = cfg.j_min.unwrap_or(-8);
            let j_max = cfg.j_max.unwrap_or(8);
            let y_exps = cfg.y_exponents.clone().unwrap_or_else(|| (-16..=0).collect());
            let y_samples: Vec<Vec<f64>> = y_exps
                .iter()
                .map(|&m| {
                    let mut y = vec![0.0; dim];
                    y[0] = (m as f64).exp2();
                    y
                })
                .collect();
            let out = check_fractional(
                &rd,
                cfg.kappa,
                &partition,
                j_min..=j_max,
                &y_samples,
                FractionalOptions {
                    box_n: cfg.box_n,
                    p1_cap: cfg.constant_cap,
                    p2_cap: cfg.constant_cap,
                },
            )
            .map_err(core_err)?;
            for (prefix, table) in [("c1x3", &out.derivative), ("c1x4", &out.shift)] {
                for row in &table.per_scale_table {
                    csv.push_str(&format!(
                        "{},{},{},{},{} {}\n",
                        row.scale, row.lhs, row.rhs_factor, row.ratio, prefix, row.label
                    ));
                }
            }
            checks.push(Check::flag(
                "conditions_passed",
                out.passed(),
                out.shift.notes.join("; "),
            ));
            for (name, table) in [
                ("derivative_scale_spread", &out.derivative),
                ("shift_scale_spread", &out.shift),
            ] {
                let spread = per_group_spread(
                    table
                        .per_scale_table
                        .iter()
                        .map(|r| (format!("{}", r.scale), r.ratio)),
                );
                checks.push(Check::upper(name, spread, cfg.max_spread));
            }
            results = json_object(vec![
                ("p1_estimate", json_f64(out.p1_estimate())),
                ("p2_estimate", json_f64(out.p2_estimate())),
                ("notes", json!(out.shift.notes)),
            ]);
        }
    }
    let tolerances = json!({
        "constant_cap": cfg.constant_cap,
        "max_spread": cfg.max_spread,
    });
    Ok((
        Report::new("symbol-check", &raw.hash, None, tolerances, checks, results),
        csv,
    ))
}

/// Relative spread of per-group maxima: `max/min - 1` over group maxima.
fn per_group_spread(rows: impl Iterator<Item = (String, f64)>) -> f64 {
    let mut groups: std::collections::BTreeMap<String, f64> = Default::default();
    for (label, ratio) in rows {
        let slot = groups.entry(label).or_insert(0.0);
        *slot = slot.max(ratio);
    }
    let lo = groups.values().cloned().fold(f64::INFINITY, f64::min);
    let hi = groups.values().cloned().fold(0.0f64, f64::max);
    if lo <= 0.0 || !lo.is_finite() {
        return f64::INFINITY;
    }
    hi / lo - 1.0
}

pub fn run_norm_sweep(raw: &RawConfig) -> Result<CommandOutput, String> {
    let cfg: NormSweepConfig = body_as(raw)?;
    let seed = cfg
        .seed
        .ok_or_else(|| "missing field `seed` (required for norm-sweep)".to_string())?;
    let symbol = cfg.symbol.build(cfg.grid.dim)?;
    let rd = extend_symbol(&symbol);
    let mut estimates = Vec::new();
    let mut csv = String::from("p,estimate,paper_factor,alt_factor\n");
    for &p in &cfg.p_values {
        let e = estimate_op_norm(&rd, cfg.grid.n, p, cfg.trials, seed).map_err(core_err)?;
        let paper_factor = p * (p - 1.0);
        let alt_factor = p.max(1.0 / (p - 1.0));
        csv.push_str(&format!("{},{},{},{}\n", p, e, paper_factor, alt_factor));
        estimates.push((p, e, alt_factor));
    }
    let mut checks = Vec::new();
    let min_e = estimates.iter().map(|&(_, e, _)| e).fold(f64::INFINITY, f64::min);
    checks.push(Check::upper("estimates_at_least_one", 1.0 - min_e, 1e-9));
    if let Some(&(_, e2, _)) = estimates.iter().find(|&&(p, _, _)| p == 2.0) {
        checks.push(Check::upper(
            "p2_plancherel_identity",
            (e2 - 1.0).abs(),
            cfg.p2_tolerance,
        ));
    }
    // monotone growth away from p = 2 on both sides
    let mut violation = 0.0f64;
    let mut below: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|&&(p, _, _)| p < 2.0)
        .map(|&(p, e, _)| (p, e))
        .collect();
    below.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in below.windows(2) {
        violation = violation.max(w[1].1 - w[0].1); // farther from 2 must be larger
    }
    let mut above: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|&&(p, _, _)| p > 2.0)
        .map(|&(p, e, _)| (p, e))
        .collect();
    above.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in above.windows(2) {
        violation = violation.max(w[0].1 - w[1].1);
    }
    checks.push(Check::upper("monotone_away_from_p2", violation, 1e-9));
    // envelope against the fitted max(p, 1/(p-1)) curve
    let fit = estimates
        .iter()
        .map(|&(_, e, alt)| e / alt)
        .fold(0.0f64, f64::max);
    let envelope_excess = estimates
        .iter()
        .map(|&(_, e, alt)| e / (fit * alt))
        .fold(0.0f64, f64::max);
    checks.push(Check::upper(
        "within_fitted_envelope",
        envelope_excess,
        cfg.envelope_factor,
    ));
    let results = json_object(vec![
        (
            "estimates",
            serde_json::Value::Array(
                estimates
                    .iter()
                    .map(|&(p, e, _)| json!([p, e]))
                    .collect(),
            ),
        ),
        ("fitted_envelope_constant", json_f64(fit)),
        (
            "note",
            json!("paper_factor column reports p(p-1) for reference; it is not asserted"),
        ),
    ]);
    let tolerances = json!({
        "p2_tolerance": cfg.p2_tolerance,
        "envelope_factor": cfg.envelope_factor,
    });
    Ok((
        Report::new("norm-sweep", &raw.hash, Some(seed), tolerances, checks, results),
        csv,
    ))
}

/// Oracle availability for an hdist run: real-form pairs share `k`, complex
/// pairs must be oriented (`k_u = -k_v`).
fn oscillation_oracle_value(
    cfg: &HdistConfig,
    spec_u: &SequenceSpecConfig,
    spec_v: &SequenceSpecConfig,
    phi1: &GridFunction,
    phi2: &GridFunction,
    psi: &hdist_core::multiplier::SphereSymbol,
) -> Result<Option<Complex64>, String> {
    let (dim, n) = (cfg.grid.dim, cfg.grid.n);
    if let (
        SequenceSpecConfig::Oscillation {
            amplitude: au,
            k: ku,
            real_form: ru,
        },
        SequenceSpecConfig::Oscillation {
            amplitude: av,
            k: kv,
            real_form: rv,
        },
    ) = (spec_u, spec_v)
    {
        if ru != rv {
            return Ok(None);
        }
        let a = au.build(dim, n, cfg.seed)?;
        let b = av.build(dim, n, cfg.seed)?;
        if *ru && ku == kv {
            return oscillation_oracle(&a, &b, kv, phi1, phi2, psi, true)
                .map(Some)
                .map_err(core_err);
        }
        let opposite = ku.iter().zip(kv).all(|(x, y)| *x == -y);
        if !*ru && opposite {
            return oscillation_oracle(&a, &b, kv, phi1, phi2, psi, false)
                .map(Some)
                .map_err(core_err);
        }
    }
    Ok(None)
}

pub fn run_hdist(raw: &RawConfig) -> Result<CommandOutput, String> {
    let cfg: HdistConfig = body_as(raw)?;
    let (dim, n) = (cfg.grid.dim, cfg.grid.n);
    let spec_u = cfg.sequence_u.build(dim, n, &cfg.schedule, cfg.seed)?;
    let spec_v = cfg.sequence_v.build(dim, n, &cfg.schedule, cfg.seed)?;
    let phi1 = cfg.phi1.build(dim, n, cfg.seed)?;
    let phi2 = cfg.phi2.build(dim, n, cfg.seed)?;
    let psi = cfg.symbol.build(dim)?;
    let opts = EvalOptions {
        residual_tol: cfg.residual_rel_tol,
        ..Default::default()
    };
    let eval =
        evaluate_hdist(&spec_u, &spec_v, &phi1, &phi2, &psi, n, &opts).map_err(core_err)?;

    let mut csv = String::from("n,re_mu,im_mu,bound,residual\n");
    for (i, (&n_val, mu)) in eval.n_values.iter().zip(&eval.mu_values).enumerate() {
        let residual = if i == 0 {
            0.0
        } else {
            (mu - eval.mu_values[i - 1]).norm()
        };
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            n_val, mu.re, mu.im, eval.bound_value, residual
        ));
    }

    let mut checks = vec![Check::upper(
        "cauchy_residual",
        eval.cauchy_residual,
        cfg.residual_rel_tol * eval.limit_estimate.norm().max(1e-12),
    )];
    let oracle = oscillation_oracle_value(&cfg, &cfg.sequence_u, &cfg.sequence_v, &phi1, &phi2, &psi)?;
    if let Some(oracle) = oracle {
        checks.push(Check::upper(
            "oracle_match",
            (eval.limit_estimate - oracle).norm(),
            cfg.oracle_rel_tol * oracle.norm().max(1e-12),
        ));
    }
    let results = json_object(vec![
        ("limit", json_complex(eval.limit_estimate)),
        ("cauchy_residual", json_f64(eval.cauchy_residual)),
        ("bound_value", json_f64(eval.bound_value)),
        (
            "oracle",
            oracle.map(json_complex).unwrap_or(serde_json::Value::Null),
        ),
    ]);
    let tolerances = json!({
        "oracle_rel_tol": cfg.oracle_rel_tol,
        "residual_rel_tol": cfg.residual_rel_tol,
    });
    Ok((
        Report::new("hdist", &raw.hash, cfg.seed, tolerances, checks, results),
        csv,
    ))
}

pub fn run_localization(raw: &RawConfig) -> Result<CommandOutput, String> {
    let cfg: LocalizationConfig = body_as(raw)?;
    let (dim, n) = (cfg.grid.dim, cfg.grid.n);
    if cfg.coefficients.len() != dim {
        return Err(format!(
            "expected {} coefficient fields, got {}",
            dim,
            cfg.coefficients.len()
        ));
    }
    let spec_u = cfg.sequence_u.build(dim, n, &cfg.schedule, cfg.seed)?;
    let spec_v = cfg.sequence_v.build(dim, n, &cfg.schedule, cfg.seed)?;
    let coefficients: Vec<GridFunction> = cfg
        .coefficients
        .iter()
        .map(|c| c.build(dim, n, cfg.seed))
        .collect::<Result<_, _>>()?;
    let phi = cfg.phi.build(dim, n, cfg.seed)?;
    let psi = cfg.symbol.build(dim)?;
    let out = localization_residual(&spec_u, &spec_v, &coefficients, &phi, &psi, n)
        .map_err(core_err)?;

    let mut csv = String::from("n,constraint_proxy\n");
    for (n_val, proxy) in cfg.schedule.iter().zip(&out.constraint_proxy) {
        csv.push_str(&format!("{},{}\n", n_val, proxy));
    }

    let mut checks = Vec::new();
    let fraction = out.residual.norm() / out.scale.max(1e-300);
    if let Some(max_frac) = cfg.max_residual_fraction {
        checks.push(Check::upper("residual_fraction", fraction, max_frac));
    }
    if let Some(expected) = cfg.expected_residual_fraction {
        checks.push(Check::upper(
            "residual_fraction_matches_expected",
            (fraction - expected).abs(),
            cfg.fraction_rel_tol * expected,
        ));
    }
    if let Some(required) = cfg.require_constraint_decreasing {
        checks.push(Check::flag(
            "constraint_proxy_trend",
            out.constraint_decreasing == required,
            format!(
                "proxy first {} last {}",
                out.constraint_proxy.first().unwrap_or(&0.0),
                out.constraint_proxy.last().unwrap_or(&0.0)
            ),
        ));
    }
    let results = json_object(vec![
        ("residual", json_complex(out.residual)),
        ("scale", json_f64(out.scale)),
        ("residual_fraction", json_f64(fraction)),
        (
            "term_values",
            serde_json::Value::Array(out.term_values.iter().map(|&v| json_complex(v)).collect()),
        ),
        (
            "constraint_proxy",
            serde_json::Value::Array(out.constraint_proxy.iter().map(|&v| json_f64(v)).collect()),
        ),
        ("constraint_decreasing", json!(out.constraint_decreasing)),
    ]);
    let tolerances = json!({
        "max_residual_fraction": cfg.max_residual_fraction,
        "expected_residual_fraction": cfg.expected_residual_fraction,
        "fraction_rel_tol": cfg.fraction_rel_tol,
    });
    Ok((
        Report::new("localization", &raw.hash, cfg.seed, tolerances, checks, results),
        csv,
    ))
}

pub fn run_divcurl(raw: &RawConfig) -> Result<CommandOutput, String> {
    let cfg: DivcurlConfig = body_as(raw)?;
    let (dim, n) = (cfg.grid.dim, cfg.grid.n);
    if dim != 2 {
        return Err("divcurl requires grid.dim = 2".into());
    }
    let u1 = cfg.u_pair[0].build(dim, n, &cfg.schedule, cfg.seed)?;
    let u2 = cfg.u_pair[1].build(dim, n, &cfg.schedule, cfg.seed)?;
    let v1 = cfg.v_pair[0].build(dim, n, &cfg.schedule, cfg.seed)?;
    let v2 = cfg.v_pair[1].build(dim, n, &cfg.schedule, cfg.seed)?;
    let phi = cfg.phi.build(dim, n, cfg.seed)?;
    let symbols: Vec<_> = cfg
        .symbols
        .iter()
        .map(|s| s.build(dim))
        .collect::<Result<_, _>>()?;
    let report = divcurl_check((&u1, &u2), (&v1, &v2), &phi, &symbols, n).map_err(core_err)?;

    let mut csv = String::from("kind,label,re,im\n");
    for (s, table) in report.mu.iter().enumerate() {
        for (i, row) in table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                csv.push_str(&format!("mu,psi{} i={} j={},{},{}\n", s, i + 1, j + 1, v.re, v.im));
            }
        }
    }
    for (s, residuals) in report.relation_residuals.iter().enumerate() {
        for (r, v) in residuals.iter().enumerate() {
            csv.push_str(&format!("relation,psi{} r{},{},{}\n", s, r + 1, v.re, v.im));
        }
    }
    for (n_val, v) in report.schedule.iter().zip(&report.vague_values) {
        csv.push_str(&format!("vague,n={},{},{}\n", n_val, v.re, v.im));
    }
    for (n_val, v) in report.schedule.iter().zip(&report.div_premise) {
        csv.push_str(&format!("div_premise,n={},{},0\n", n_val, v));
    }
    for (n_val, v) in report.schedule.iter().zip(&report.curl_premise) {
        csv.push_str(&format!("curl_premise,n={},{},0\n", n_val, v));
    }

    let max_mu = report.max_mu_magnitude();
    let max_residual = report
        .relation_residuals
        .iter()
        .flat_map(|r| r.iter())
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    let mut checks = vec![
        Check::upper(
            "relation_residuals",
            max_residual,
            cfg.relation_fraction * max_mu.max(1e-12),
        ),
        Check::flag(
            "premises_bounded",
            report.premises_bounded,
            format!(
                "div {:?} curl {:?}",
                report.div_premise, report.curl_premise
            ),
        ),
    ];
    if let Some(cap) = cfg.max_final_vague {
        checks.push(Check::upper(
            "final_vague_value",
            report.vague_values.last().map(|v| v.norm()).unwrap_or(0.0),
            cap,
        ));
    }
    let results = json_object(vec![
        ("max_mu_magnitude", json_f64(max_mu)),
        ("max_relation_residual", json_f64(max_residual)),
        (
            "final_vague",
            report
                .vague_values
                .last()
                .map(|&v| json_complex(v))
                .unwrap_or(serde_json::Value::Null),
        ),
        ("premises_bounded", json!(report.premises_bounded)),
    ]);
    let tolerances = json!({
        "relation_fraction": cfg.relation_fraction,
        "max_final_vague": cfg.max_final_vague,
    });
    Ok((
        Report::new("divcurl", &raw.hash, cfg.seed, tolerances, checks, results),
        csv,
    ))
}

pub fn run_cz(raw: &RawConfig) -> Result<CommandOutput, String> {
    let cfg: CzConfig = body_as(raw)?;
    let seed = cfg
        .seed
        .ok_or_else(|| "missing field `seed` (required for cz)".to_string())?;
    let (dim, n) = (cfg.grid.dim, cfg.grid.n);
    let mut csv = String::from(
        "field,level,pieces,recon_err,l1_budget,l1_allowance,good_sup,sup_allowance,measure,measure_allowance\n",
    );
    let mut worst = [0.0f64; 5]; // normalized slack per property
    for field_idx in 0..cfg.fields {
        let f = hdist_core::fields::random_uniform_real(dim, n, seed.wrapping_add(field_idx as u64))
            .map_err(core_err)?
            .mean_subtracted()
            .map(|v| Complex64::new(v.re, 0.0));
        let l1 = lp_norm(&f, 1.0).map_err(core_err)?;
        for &level in &cfg.levels {
            let dec = cz_decompose(&f, level).map_err(core_err)?;
            // (i) reconstruction
            let mut recon = dec.f0.values().to_vec();
            for piece in &dec.pieces {
                for (i, v) in piece.part.values().iter().enumerate() {
                    recon[i] += v;
                }
            }
            let recon_err = recon
                .iter()
                .zip(f.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            // (ii) L1 budget
            let mut budget = lp_norm(&dec.f0, 1.0).map_err(core_err)?;
            for piece in &dec.pieces {
                budget += lp_norm(&piece.part, 1.0).map_err(core_err)?;
            }
            // (iii) sup bound
            let sup = lp_norm(&dec.f0, f64::INFINITY).map_err(core_err)?;
            let sup_allow = (1u32 << dim) as f64 * level;
            // (iv) mean-zero pieces on their cubes
            let mut mean_err = 0.0f64;
            for piece in &dec.pieces {
                let total: Complex64 = piece.part.values().iter().sum();
                mean_err = mean_err.max((total / f.len() as f64).norm());
                for (flat, idx) in multi_indices(dim, n) {
                    if !piece.cube.contains(&idx[..dim]) && piece.part.values()[flat].norm() != 0.0
                    {
                        mean_err = f64::INFINITY;
                    }
                }
            }
            // (v) total measure
            let measure: f64 = dec.pieces.iter().map(|p| p.cube.measure(dim, n)).sum();
            let measure_allow = l1 / level;
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                field_idx,
                level,
                dec.pieces.len(),
                recon_err,
                budget,
                3.0 * l1,
                sup,
                sup_allow,
                measure,
                measure_allow
            ));
            worst[0] = worst[0].max(recon_err);
            worst[1] = worst[1].max(budget - 3.0 * l1);
            worst[2] = worst[2].max(sup - sup_allow);
            worst[3] = worst[3].max(mean_err);
            worst[4] = worst[4].max(measure - measure_allow);
        }
    }
    let checks = vec![
        Check::upper("reconstruction_exact", worst[0], cfg.tolerance),
        Check::upper("l1_budget", worst[1], cfg.tolerance),
        Check::upper("good_part_bounded", worst[2], cfg.tolerance),
        Check::upper("pieces_mean_zero_on_cubes", worst[3], cfg.tolerance),
        Check::upper("total_measure", worst[4], cfg.tolerance),
    ];
    let results = json_object(vec![
        ("fields", json!(cfg.fields)),
        ("levels", json!(cfg.levels)),
    ]);
    let tolerances = json!({ "tolerance": cfg.tolerance });
    Ok((
        Report::new("cz", &raw.hash, Some(seed), tolerances, checks, results),
        csv,
    ))
}

pub fn run_commutator(raw: &RawConfig) -> Result<CommandOutput, String> {
    let cfg: CommutatorConfig = body_as(raw)?;
    let (dim, n) = (cfg.grid.dim, cfg.grid.n);
    let spec = cfg.sequence.build(dim, n, &cfg.schedule, cfg.seed)?;
    let psi = cfg.symbol.build(dim)?;
    let b = cfg.multiplier_field.build(dim, n, cfg.seed)?;
    let values =
        hdist_core::hdist::commutator_decay(&spec, &psi, &b, cfg.q, n).map_err(core_err)?;

    let mut csv = String::from("n,commutator_norm\n");
    for (n_val, v) in cfg.schedule.iter().zip(&values) {
        csv.push_str(&format!("{},{}\n", n_val, v));
    }
    let first = values.first().copied().unwrap_or(0.0);
    let last = values.last().copied().unwrap_or(0.0);
    let checks = vec![Check::upper(
        "commutator_decay",
        last,
        cfg.decay_ratio * first,
    )];
    let results = json_object(vec![
        (
            "norms",
            serde_json::Value::Array(values.iter().map(|&v| json_f64(v)).collect()),
        ),
        ("q", json_f64(cfg.q)),
    ]);
    let tolerances = json!({ "decay_ratio": cfg.decay_ratio });
    Ok((
        Report::new("commutator", &raw.hash, cfg.seed, tolerances, checks, results),
        csv,
    ))
}

