//! One function per subcommand, each returning a gated report.

use ballwalk_core::analysis::{
    band_containment, band_sweep, essential_band, gaussian_levels, schrodinger_levels, spectral_gap,
    verify_asymptotics, weyl_curve, GridPolicy,
};
use ballwalk_core::multiplier::{taylor_check, MultiplierTable};
use ballwalk_core::operator::build_markov;
use ballwalk_core::walk::{
    chi_square_gof, log_slope, nu_h_bin_masses, nu_h_cell_masses, plug_in_reference, simulate_paths,
    step_histogram_1d, step_law_1d, tv_exact_grid, tv_lower_bound_witness, tv_upper_bound_curve, Binning, Start,
    WalkConfig,
};
use ballwalk_core::{Density, DensityKind, Error, RadialDensity, Result, Scheme, WeightRule};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{section, ExperimentConfig, MuSource};
use crate::report::{to_value, Gate, Report, Table};

fn density(cfg: &ExperimentConfig) -> Result<Density> {
    Density::new(cfg.density.clone())
}

fn require_gaussian(d: &Density) -> Result<()> {
    if d.kind() != DensityKind::Gaussian {
        return Err(Error::WrongDensityKind {
            expected: "gaussian",
            found: d.kind().name(),
        });
    }
    Ok(())
}

pub fn spectrum(cfg: &ExperimentConfig) -> Result<Report> {
    let s = section(&cfg.spectrum, "spectrum")?;
    let rho = density(cfg)?;
    let (mu, levels) = match s.mu {
        MuSource::Exact => {
            require_gaussian(&rho)?;
            (gaussian_levels(rho.dim(), rho.alpha(), s.k_max + 1), None)
        }
        MuSource::Schrodinger => {
            let l = schrodinger_levels(
                &rho,
                s.k_max + 1,
                cfg.grid.half_width,
                s.schrodinger_spacings,
                &cfg.lanczos,
            )?;
            (l.extrapolated.clone(), Some(l))
        }
    };
    let rep = verify_asymptotics(&rho, s.k_max, &s.h_list, &mu, &cfg.grid, &cfg.lanczos)?;
    let h_min = rep.rows.last().map_or(f64::NAN, |r| r.h);
    let mut gates = vec![Gate::at_most("lambda0_defect", rep.lambda0_defect, 1e-8)];
    for f in &rep.fits {
        gates.push(Gate::at_least(format!("order_k{}", f.k), f.order, 3.5));
        let last = rep.rows.last().map_or(f64::NAN, |r| r.residual[f.k]);
        gates.push(Gate::at_most(
            format!("residual_k{}_over_cfit_h4", f.k),
            last / (f.c_fit * h_min.powi(4)),
            2.0,
        ));
    }
    let mut rows = Vec::new();
    for r in &rep.rows {
        for k in 0..=s.k_max {
            rows.push(vec![
                Some(r.h),
                Some(k as f64),
                Some(r.lambda[k]),
                Some(r.predicted[k]),
                Some(r.residual[k]),
            ]);
        }
    }
    Ok(Report {
        command: "spectrum",
        gates,
        body: json!({ "asymptotics": to_value(&rep)?, "schrodinger": to_value(&levels)? }),
        table: Table {
            columns: vec!["h", "k", "lambda", "predicted", "residual"],
            rows,
        },
    })
}

pub fn gap_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let s = section(&cfg.gap_sweep, "gap_sweep")?;
    let rho = density(cfg)?;
    let mu1 = match (s.mu1, rho.kind()) {
        (Some(m), _) => m,
        (None, DensityKind::Gaussian) => 4.0 * rho.alpha(),
        (None, _) => return Err(Error::InvalidConfig("gap_sweep.mu1 is required for tempered densities".into())),
    };
    let reports = s
        .h_list
        .par_iter()
        .map(|&h| spectral_gap(&rho, h, mu1, s.alpha_cfg, &cfg.grid, &cfg.lanczos))
        .collect::<Result<Vec<_>>>()?;
    let min_gap = reports.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let max_gap = reports.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max);
    let mut gates = vec![
        Gate::at_least("min_gap", min_gap, f64::MIN_POSITIVE),
        Gate::at_most("max_gap", max_gap, 1.0 - f64::EPSILON),
    ];
    if rho.kind() == DensityKind::Gaussian {
        let dev = reports
            .iter()
            .filter(|r| r.h <= 0.25)
            .map(|r| (r.ratio - 1.0).abs())
            .fold(f64::NAN, f64::max);
        if dev.is_finite() {
            gates.push(Gate::at_most("ratio_deviation_h_le_0.25", dev, 0.1));
        }
    }
    let mut halving = f64::NAN;
    for a in &reports {
        for b in &reports {
            if (a.h - 2.0 * b.h).abs() <= 1e-9 * a.h {
                halving = halving.max((a.gap / b.gap / 4.0 - 1.0).abs());
            }
        }
    }
    if halving.is_finite() {
        gates.push(Gate::at_most("halving_ratio_deviation", halving, 0.15));
    }
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                Some(r.h),
                Some(r.lambda1),
                Some(r.gap),
                Some(r.predicted),
                Some(r.comparison),
                Some(r.ratio),
            ]
        })
        .collect();
    Ok(Report {
        command: "gap-sweep",
        gates,
        body: json!({ "mu1": mu1, "gaps": to_value(&reports)? }),
        table: Table {
            columns: vec!["h", "lambda1", "gap", "predicted", "comparison", "ratio"],
            rows,
        },
    })
}

pub fn weyl(cfg: &ExperimentConfig) -> Result<Report> {
    let s = section(&cfg.weyl, "weyl")?;
    let rho = density(cfg)?;
    require_gaussian(&rho)?;
    let rep = weyl_curve(&rho, &s.h_list, &s.lambdas(), &cfg.grid)?;
    let d = rho.dim() as i32;
    let per_h: Vec<_> = s
        .h_list
        .iter()
        .map(|&h| {
            let c = rep
                .points
                .iter()
                .filter(|p| p.h == h)
                .map(|p| p.count as f64 / p.scaled.powi(d))
                .fold(0.0, f64::max);
            json!({ "h": h, "c": c })
        })
        .collect();
    let gates = vec![Gate::at_most("exponent", rep.exponent, d as f64 + 0.3)];
    let rows = rep
        .points
        .iter()
        .map(|p| vec![Some(p.h), Some(p.lambda), Some(p.count as f64), Some(p.scaled)])
        .collect();
    Ok(Report {
        command: "weyl",
        gates,
        body: json!({ "weyl": to_value(&rep)?, "c_per_h": per_h }),
        table: Table {
            columns: vec!["h", "lambda", "count", "scaled"],
            rows,
        },
    })
}

pub fn band(cfg: &ExperimentConfig) -> Result<Report> {
    let s = section(&cfg.band, "band")?;
    let rho = density(cfg)?;
    if rho.kind() == DensityKind::Gaussian {
        let reports = s
            .h_list
            .iter()
            .map(|&h| essential_band(&rho, h, &[]))
            .collect::<Result<Vec<_>>>()?;
        let rows = reports
            .iter()
            .map(|r| vec![Some(r.h), None, Some(r.m), None, None, None])
            .collect();
        return Ok(Report {
            command: "band",
            gates: Vec::new(),
            body: json!({ "compact": true, "band": [], "reports": to_value(&reports)? }),
            table: Table {
                columns: vec!["h", "a_h", "m", "lower", "upper", "edge_residual"],
                rows,
            },
        });
    }
    let sweep = band_sweep(&rho, &s.h_list)?;
    let mut gates = vec![Gate::at_least("edge_order", sweep.order, 3.5)];
    let mut containment = Vec::new();
    if let Some(c) = &s.containment {
        for &h in &c.h_list {
            let b = essential_band(&rho, h, &ballwalk_core::analysis::default_probes(&rho, h))?;
            let r = band_containment(&rho, h, &c.grid, &b)?;
            gates.push(Gate::at_least(format!("lower_margin_h{h}"), r.lower_margin, -c.tolerance));
            gates.push(Gate::at_most(format!("max_eigenvalue_h{h}"), r.max_eigenvalue, 1.0 + 1e-8));
            containment.push(r);
        }
    }
    let rows = sweep
        .reports
        .iter()
        .map(|r| {
            let [lo, hi] = r.band.map_or([None, None], |[a, b]| [Some(a), Some(b)]);
            vec![Some(r.h), r.a_h, Some(r.m), lo, hi, r.edge_residual]
        })
        .collect();
    Ok(Report {
        command: "band",
        gates,
        body: json!({ "compact": false, "sweep": to_value(&sweep)?, "containment": to_value(&containment)? }),
        table: Table {
            columns: vec!["h", "a_h", "m", "lower", "upper", "edge_residual"],
            rows,
        },
    })
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Report> {
    let s = section(&cfg.simulate, "simulate")?;
    let rho = density(cfg)?;
    let grid = cfg.grid.grid(rho.dim(), s.h)?;
    let bins = Binning::aligned(&grid, s.cells_per_bin)?;
    let target = nu_h_bin_masses(&rho, s.h, &grid, &bins)?;
    let start = match &s.x0 {
        Some(x) => Start::Point(x.clone()),
        None => Start::Stationary,
    };
    let walk = WalkConfig {
        h: s.h,
        start: start.clone(),
        paths: s.paths,
        horizon: s.horizon,
        seed: cfg.seed,
    };
    let ens = simulate_paths(&rho, &walk, &bins)?;
    let null = plug_in_reference(&target, &target, s.paths as u64, s.replicates, cfg.seed ^ 0x5eed);
    let tv: Vec<f64> = (0..=s.horizon).map(|n| ens.empirical_tv(n, &target)).collect();
    let mut gates = Vec::new();
    if start == Start::Stationary {
        let z = tv.iter().map(|t| (t - null.mean) / null.sd).fold(f64::NEG_INFINITY, f64::max);
        gates.push(Gate::at_most("stationary_tv_z_max", z, 3.0));
    }
    let mut chi = None;
    if s.step_samples > 0 {
        if rho.dim() != 1 {
            return Err(Error::InvalidConfig("the step χ² test runs in d = 1".into()));
        }
        let x0 = s.x0.as_ref().map_or(0.0, |x| x[0]);
        let probs = step_law_1d(&rho, s.h, x0, s.step_bins)?;
        let counts = step_histogram_1d(&rho, s.h, x0, s.step_bins, s.step_samples, cfg.seed)?;
        let (stat, dof, p) = chi_square_gof(&counts, &probs);
        gates.push(Gate::at_least("step_chi2_p", p, 0.01));
        chi = Some(json!({ "x0": x0, "statistic": stat, "dof": dof, "p": p, "counts": counts, "probs": probs }));
    }
    let rows = tv
        .iter()
        .enumerate()
        .map(|(n, t)| vec![Some(n as f64), Some(*t), Some(null.mean), Some(null.sd)])
        .collect();
    Ok(Report {
        command: "simulate",
        gates,
        body: json!({
            "bins": to_value(&bins)?,
            "null": to_value(&null)?,
            "tv_mc": tv,
            "step_chi2": chi,
        }),
        table: Table {
            columns: vec!["n", "tv_mc", "null_mean", "null_sd"],
            rows,
        },
    })
}

pub fn tv(cfg: &ExperimentConfig) -> Result<Report> {
    let s = section(&cfg.tv, "tv")?;
    let rho = density(cfg)?;
    let h = s.h;
    let grid = cfg.grid.grid(rho.dim(), h)?;
    grid.check_truncation(&rho)?;
    let op = build_markov(&grid, &rho, h)?;
    let gap_policy = GridPolicy {
        scheme: Scheme::BandedQuadrature,
        weight_rule: WeightRule::Discrete,
        ..cfg.grid
    };
    let mu1 = if rho.kind() == DensityKind::Gaussian {
        4.0 * rho.alpha()
    } else {
        f64::NAN
    };
    let gap = spectral_gap(&rho, h, mu1, 0.9, &gap_policy, &cfg.lanczos)?;
    let g = gap.gap;
    let nu_proj = nu_h_cell_masses(&grid, &rho, h)?;
    let curve = tv_exact_grid(&op, Some(&nu_proj), &s.x0, s.n_max)?;
    let ub = tv_upper_bound_curve(&rho, &op, s.tau, g, s.n_max)?;
    let [from, to] = s.slope_window.unwrap_or([s.n_max / 2, s.n_max]);
    if from >= to || to > s.n_max {
        return Err(Error::InvalidConfig(format!("slope window [{from}, {to}] outside 0..={}", s.n_max)));
    }
    let slope = log_slope(&curve.tv, from, to);
    let ub_slope = log_slope(&ub.tv_max, from, to);
    let increment = curve.tv.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut gates = vec![
        Gate::at_most("tv_max_increment", increment, 1e-12),
        Gate::at_most("upper_bound_c_fit", ub.c_fit, f64::MAX),
    ];
    if s.rate_gates {
        gates.push(Gate::at_most("slope_rel_deviation", (slope / -g - 1.0).abs(), 0.2));
        gates.push(Gate::at_most(
            "upper_bound_rate_rel_deviation",
            (ub_slope / -g - 1.0).abs(),
            0.2,
        ));
    }

    let start_norm = curve.start.iter().map(|v| v * v).sum::<f64>().sqrt();
    let witness_valid = |n: usize| start_norm >= s.tau + (n as f64 + 1.0) * h;
    let witness = if witness_valid(0) {
        Some(tv_lower_bound_witness(&rho, h, &curve.start, s.tau, 0)?)
    } else {
        None
    };
    let witness_col: Vec<Option<f64>> = (0..=s.n_max)
        .map(|n| witness.as_ref().filter(|_| witness_valid(n)).map(|w| w.value))
        .collect();
    let excess = witness_col
        .iter()
        .zip(&curve.tv_projected)
        .filter_map(|(w, t)| w.map(|w| w - t))
        .fold(f64::NEG_INFINITY, f64::max);
    if excess.is_finite() {
        gates.push(Gate::at_most("witness_excess_over_exact", excess, 1e-9));
    }

    let mut mc = vec![None; s.n_max + 1];
    let mut se = vec![None; s.n_max + 1];
    let mut mc_body = serde_json::Value::Null;
    if s.paths > 0 {
        let bins = Binning::aligned(&grid, s.cells_per_bin)?;
        let target = nu_h_bin_masses(&rho, h, &grid, &bins)?;
        let walk = WalkConfig {
            h,
            start: Start::Point(curve.start.clone()),
            paths: s.paths,
            horizon: s.n_max,
            seed: cfg.seed,
        };
        let ens = simulate_paths(&rho, &walk, &bins)?;
        let mut law = vec![0.0; grid.len()];
        law[curve.start_index] = 1.0;
        let mut next = vec![0.0; grid.len()];
        let mut laws = Vec::with_capacity(s.n_max + 1);
        for n in 0..=s.n_max {
            if n > 0 {
                op.apply_transpose(&law, &mut next);
                std::mem::swap(&mut law, &mut next);
            }
            laws.push(bins.project(&grid, &law));
        }
        let refs: Vec<_> = laws
            .par_iter()
            .enumerate()
            .map(|(n, l)| plug_in_reference(l, &target, s.paths as u64, s.replicates, cfg.seed ^ n as u64))
            .collect();
        for n in 0..=s.n_max {
            mc[n] = Some(ens.empirical_tv(n, &target));
            se[n] = Some(refs[n].sd);
        }
        if s.mc_check_n <= s.n_max {
            let r = &refs[s.mc_check_n];
            let t = ens.empirical_tv(s.mc_check_n, &target);
            let z = (t - r.mean).abs() / r.sd;
            gates.push(Gate::at_most(format!("mc_vs_exact_z_n{}", s.mc_check_n), z, 3.0));
        }
        mc_body = json!({
            "bins": to_value(&bins)?,
            "reference_mean": refs.iter().map(|r| r.mean).collect::<Vec<_>>(),
        });
    }

    let rows = (0..=s.n_max)
        .map(|n| vec![Some(n as f64), Some(curve.tv[n]), mc[n], se[n], Some(ub.bound[n]), witness_col[n]])
        .collect();
    Ok(Report {
        command: "tv",
        gates,
        body: json!({
            "gap": to_value(&gap)?,
            "slope": slope,
            "upper_bound_slope": ub_slope,
            "slope_window": [from, to],
            "exact": to_value(&curve)?,
            "upper_bound": to_value(&ub)?,
            "witness": to_value(&witness)?,
            "monte_carlo": mc_body,
        }),
        table: Table {
            columns: vec!["n", "tv_exact", "tv_mc", "tv_mc_se", "upper_bound", "lower_bound_witness"],
            rows,
        },
    })
}

pub fn dump_multiplier(cfg: &ExperimentConfig) -> Result<Report> {
    let s = section(&cfg.dump_multiplier, "dump_multiplier")?;
    if !(s.step > 0.0 && s.r_max > 0.0) {
        return Err(Error::InvalidConfig("dump_multiplier needs positive r_max and step".into()));
    }
    let d = cfg.density.dim;
    let table = MultiplierTable::new(d);
    let samples: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    let taylor = taylor_check(d, &samples);
    let rows = table
        .table(s.r_max, s.step)
        .into_iter()
        .map(|(r, g)| vec![Some(r), Some(g)])
        .collect();
    Ok(Report {
        command: "dump-multiplier",
        gates: vec![Gate::at_least("taylor_f_min", taylor.min_f, f64::MIN_POSITIVE)],
        body: json!({ "multiplier": to_value(&table)?, "taylor": to_value(&taylor)? }),
        table: Table {
            columns: vec!["r", "g_d"],
            rows,
        },
    })
}
