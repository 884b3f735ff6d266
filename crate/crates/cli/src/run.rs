//! Sweep execution and CSV output.

use std::fmt::Write as _;

use cmf_core::asymptotics::{strong_field_concurrence, thermal_corrected_concurrence, StrongFieldInputs};
use cmf_core::ed::{thermal_state, zero_temperature_state, EdResult, ThermalEnsemble};
use cmf_core::jw::{jw_correlations, jw_ground};
use cmf_core::observables::{concurrence_pair, CONCURRENCE_FLOOR};
use cmf_core::{
    build_couplings, critical_field, evaluate, factorizing_field, ChainSpec, ConcurrenceKind, CouplingFamily,
    CouplingProfile, ObservableFlag,
};
use rayon::prelude::*;

use crate::config::{Method, RunConfig, Sweep};

pub const HEADER: &str =
    "method,n,family,alpha_or_L,chi,vz,b_over_bc,T,j,C,C_plus,C_minus,kind,alpha_x,alpha_y,alpha_z,sz,flags";

/// One sweep sample; `b_over_bc` is the reported axis value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub b_over_bc: f64,
    pub b: f64,
    pub t: f64,
}

#[derive(Clone, Debug)]
struct Row {
    j: usize,
    c: f64,
    c_plus: f64,
    c_minus: f64,
    kind: &'static str,
    alpha: [f64; 3],
    sz: f64,
    flags: Vec<String>,
}

impl Row {
    fn failed(j: usize, msg: &str) -> Self {
        Self {
            j,
            c: f64::NAN,
            c_plus: f64::NAN,
            c_minus: f64::NAN,
            kind: "",
            alpha: [f64::NAN; 3],
            sz: f64::NAN,
            flags: vec![format!("error: {}", msg.replace([',', '\n'], ";"))],
        }
    }
}

pub struct Outcome {
    pub csv: String,
    pub rows: usize,
    pub failures: usize,
    pub bc: f64,
    pub bs: Option<f64>,
}

pub fn couplings(cfg: &RunConfig) -> Result<CouplingProfile, String> {
    let family = CouplingFamily::new(cfg.kind.clone(), cfg.vx, cfg.chi * cfg.vx, cfg.vz * cfg.vx);
    build_couplings(&family, cfg.n).map_err(|e| e.to_string())
}

/// Field unit of the sweep: `b_c` of the realized couplings, or 1 when it vanishes.
fn field_unit(bc: f64) -> f64 {
    if bc > 0.0 {
        bc
    } else {
        1.0
    }
}

/// `steps + 1` points, shifted by half a step off `b_c`, plus `b_s` when it lies in range.
pub fn sweep_points(sweep: &Sweep, bc: f64, bs: Option<f64>) -> Vec<Point> {
    let unit = field_unit(bc);
    match *sweep {
        Sweep::Field { b_min, b_max, steps, temperature } => {
            let h = (b_max - b_min) / steps as f64;
            let mut ms: Vec<f64> = (0..=steps)
                .map(|i| {
                    let m = b_min + h * i as f64;
                    if bc > 0.0 && (m.abs() - 1.0).abs() < 1e-12 {
                        m + 0.5 * h
                    } else {
                        m
                    }
                })
                .collect();
            if let Some(bs) = bs {
                let m = bs / unit;
                if (b_min..=b_max).contains(&m) && !ms.iter().any(|x| (x - m).abs() < 1e-12) {
                    ms.push(m);
                }
            }
            ms.sort_by(f64::total_cmp);
            ms.into_iter().map(|m| Point { b_over_bc: m, b: m * unit, t: temperature }).collect()
        }
        Sweep::Temperature { t_min, t_max, steps, b } => {
            let h = (t_max - t_min) / steps as f64;
            (0..=steps).map(|i| Point { b_over_bc: b, b: b * unit, t: t_min + h * i as f64 }).collect()
        }
    }
}

fn kind_of(c: f64, cp: f64, cm: f64) -> &'static str {
    if c <= 0.0 {
        ConcurrenceKind::Separable.label()
    } else if cp >= cm {
        ConcurrenceKind::Parallel.label()
    } else {
        ConcurrenceKind::Antiparallel.label()
    }
}

fn flag_label(flag: &ObservableFlag, j: usize) -> Option<String> {
    const AXES: [&str; 3] = ["x", "y", "z"];
    match *flag {
        ObservableFlag::CriticalRegion => Some("critical_region".into()),
        ObservableFlag::MagnetizationBound => Some("magnetization_bound".into()),
        ObservableFlag::SpinBound { axis, j: k } if k == j => Some(format!("spin_bound_{}", AXES[axis])),
        ObservableFlag::NegativeProbability { j: k, .. } if k == j => Some("negative_probability".into()),
        ObservableFlag::BothBranchesPositive { j: k } if k == j => Some("both_branches_positive".into()),
        _ => None,
    }
}

fn cmf_rows(cfg: &RunConfig, c: &CouplingProfile, p: Point) -> Result<Vec<Row>, String> {
    let chain = ChainSpec::new(cfg.n, p.b, p.t).map_err(|e| e.to_string())?;
    let r = evaluate(&chain, c).map_err(|e| e.to_string())?;
    let prof = &r.concurrence;
    Ok(cfg
        .separations
        .iter()
        .map(|&j| {
            let mut flags: Vec<String> = prof.flags.iter().filter_map(|f| flag_label(f, j)).collect();
            flags.dedup();
            Row {
                j,
                c: prof.c[j],
                c_plus: prof.c_plus[j],
                c_minus: prof.c_minus[j],
                kind: prof.kind[j].label(),
                alpha: r.corr.at(j),
                sz: r.corr.sz,
                flags,
            }
        })
        .collect())
}

fn exact_rows(cfg: &RunConfig, e: &EdResult) -> Vec<Row> {
    cfg.separations
        .iter()
        .map(|&j| {
            let alpha = [e.alpha[0][j], e.alpha[1][j], e.alpha[2][j]];
            let (cp, cm) = concurrence_pair(alpha, e.sz);
            let c = e.concurrence[j];
            Row {
                j,
                c,
                c_plus: cp,
                c_minus: cm,
                kind: kind_of(c, cp, cm),
                alpha,
                sz: e.sz,
                flags: if e.degenerate { vec!["degenerate".into()] } else { Vec::new() },
            }
        })
        .collect()
}

fn jw_rows(cfg: &RunConfig, c: &CouplingProfile, p: Point) -> Result<Vec<Row>, String> {
    let spec = jw_ground(c, p.b).map_err(|e| e.to_string())?;
    Ok(cfg
        .separations
        .iter()
        .map(|&j| {
            let (alpha, sz) = jw_correlations(&spec, j);
            let (cp, cm) = concurrence_pair(alpha, sz);
            let c = if cp.max(cm) > CONCURRENCE_FLOOR { cp.max(cm) } else { 0.0 };
            Row { j, c, c_plus: cp, c_minus: cm, kind: kind_of(c, cp, cm), alpha, sz, flags: Vec::new() }
        })
        .collect())
}

/// Strong-field parallel concurrence with its thermal correction; no correlators.
fn asymptotic_rows(cfg: &RunConfig, c: &CouplingProfile, p: Point) -> Vec<Row> {
    let inp = StrongFieldInputs::new(c, p.b, p.t);
    cfg.separations
        .iter()
        .map(|&j| {
            let (raw, clipped) = thermal_corrected_concurrence(strong_field_concurrence(j, &inp), inp.lambda, p.t);
            Row {
                j,
                c: clipped,
                c_plus: raw,
                c_minus: f64::NAN,
                kind: if clipped > 0.0 {
                    ConcurrenceKind::Parallel.label()
                } else {
                    ConcurrenceKind::Separable.label()
                },
                alpha: [f64::NAN; 3],
                sz: f64::NAN,
                flags: Vec::new(),
            }
        })
        .collect()
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        // no negative zeros in the output
        format!("{:.11e}", x + 0.0)
    }
}

/// Runs every method on every sweep point; rows come out in (method, point, j) order.
pub fn run(cfg: &RunConfig) -> Result<Outcome, String> {
    let c = couplings(cfg)?;
    let bc = critical_field(&c);
    let [vx, vy, vz] = c.total();
    let bs = factorizing_field(vx, vy, vz).ok();
    let points = sweep_points(&cfg.sweep, bc, bs);

    // a temperature sweep reuses one exact spectrum for all points
    let ensemble = match cfg.sweep {
        Sweep::Temperature { .. } if cfg.methods.contains(&Method::Ed) && points.iter().any(|p| p.t > 0.0) => {
            Some(ThermalEnsemble::new(&c, points[0].b).map_err(|e| e.to_string()))
        }
        _ => None,
    };

    let tasks: Vec<(Method, Point)> = cfg.methods.iter().flat_map(|&m| points.iter().map(move |&p| (m, p))).collect();
    let blocks: Vec<Result<Vec<Row>, String>> = tasks
        .par_iter()
        .map(|&(method, p)| match method {
            Method::Cmf => cmf_rows(cfg, &c, p),
            Method::Ed => {
                let state = if p.t <= 0.0 {
                    zero_temperature_state(&c, p.b).map_err(|e| e.to_string())
                } else {
                    match &ensemble {
                        Some(Ok(ens)) => ens.at(p.t).map_err(|e| e.to_string()),
                        Some(Err(e)) => Err(e.clone()),
                        None => thermal_state(&c, p.b, p.t).map_err(|e| e.to_string()),
                    }
                };
                state.map(|e| exact_rows(cfg, &e))
            }
            Method::Jw => jw_rows(cfg, &c, p),
            Method::Asymptotic => Ok(asymptotic_rows(cfg, &c, p)),
        })
        .collect();

    let mut csv = String::with_capacity(tasks.len() * cfg.separations.len() * 256);
    csv.push_str(HEADER);
    csv.push('\n');
    let (mut rows, mut failures) = (0, 0);
    let fixed = format!("{},{},{},{},{}", cfg.n, cfg.family.label(), cfg.alpha_or_range, fmt(cfg.chi), fmt(cfg.vz));
    for ((method, p), block) in tasks.iter().zip(blocks) {
        let block = block.unwrap_or_else(|msg: String| {
            failures += 1;
            cfg.separations.iter().map(|&j| Row::failed(j, &msg)).collect()
        });
        for r in block {
            rows += 1;
            let _ = writeln!(
                csv,
                "{},{fixed},{},{},{},{},{},{},{},{},{},{},{},{}",
                method.label(),
                fmt(p.b_over_bc),
                fmt(p.t),
                r.j,
                fmt(r.c),
                fmt(r.c_plus),
                fmt(r.c_minus),
                r.kind,
                fmt(r.alpha[0]),
                fmt(r.alpha[1]),
                fmt(r.alpha[2]),
                fmt(r.sz),
                r.flags.join(";"),
            );
        }
    }
    Ok(Outcome { csv, rows, failures, bc, bs })
}
