//! `correlate`: long-format two-point function tables over finite rings,
//! the thermodynamic limit and the large-distance asymptotic form.
//!
//! Operators sit on sites 1 and r, so the printed r is one more than the
//! number of bonds between them; r starts at 2.

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use qvbs::correlator::{
    asymptotic, two_point_finite, two_point_thermo, validity_radius, PairOp,
};
use qvbs::Deformation;

use crate::grid;
use crate::output::{self, OutArgs, TableRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairTag {
    /// S^z at both sites
    Zz,
    /// S^+ at site 1, S^- at site r
    Pm,
}

impl PairTag {
    fn op(self) -> PairOp {
        match self {
            PairTag::Zz => PairOp::Zz,
            PairTag::Pm => PairOp::Pm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    /// Ring of length L
    Finite,
    /// L -> infinity spectral sum
    Thermo,
    /// Leading large-distance form
    Asymptotic,
    /// Finite and thermo rows with a gap column
    Both,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Site spin S (integer, S >= 1)
    #[arg(long)]
    pub spin: i64,
    /// Single q or comma-separated list
    #[arg(long, conflicts_with = "q_grid")]
    pub q: Option<String>,
    /// Grid start:stop:count[:log|lin]; default 0.25:4:13:log
    #[arg(long)]
    pub q_grid: Option<String>,
    /// Observable pair
    #[arg(long, value_enum, default_value_t = PairTag::Zz)]
    pub pair: PairTag,
    /// Which correlator(s) to tabulate
    #[arg(long, value_enum, default_value_t = ModeTag::Thermo)]
    pub mode: ModeTag,
    /// Separations, e.g. 2..12 or a single value (minimum 2)
    #[arg(long, default_value = "2..12")]
    pub r: String,
    /// Ring length for finite modes
    #[arg(long = "L", default_value_t = 12)]
    pub len: i64,
    /// Worker threads (0 = one per core)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Serialize)]
struct Config {
    spin: i64,
    q_values: Vec<f64>,
    pair: PairTag,
    mode: ModeTag,
    r_values: Vec<i64>,
    #[serde(rename = "L")]
    len: Option<i64>,
}

#[derive(Serialize)]
struct Row {
    spin: i64,
    q: f64,
    pair: PairTag,
    mode: &'static str,
    #[serde(rename = "L")]
    len: Option<i64>,
    r: i64,
    value: f64,
    log_abs: Option<f64>,
    local_ratio: Option<f64>,
    fitted_zeta: Option<f64>,
    thermo_gap: Option<f64>,
    validity_radius: Option<i64>,
}

impl TableRow for Row {
    const HEADERS: &'static [&'static str] = &[
        "spin",
        "q",
        "pair",
        "mode",
        "L",
        "r",
        "value",
        "log_abs",
        "local_ratio",
        "fitted_zeta",
        "thermo_gap",
        "validity_radius",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.spin.to_string(),
            output::fmt_float(self.q),
            match self.pair {
                PairTag::Zz => "zz".into(),
                PairTag::Pm => "pm".into(),
            },
            self.mode.to_string(),
            output::fmt_opt_int(self.len),
            self.r.to_string(),
            output::fmt_float(self.value),
            output::fmt_opt_float(self.log_abs),
            output::fmt_opt_float(self.local_ratio),
            output::fmt_opt_float(self.fitted_zeta),
            output::fmt_opt_float(self.thermo_gap),
            output::fmt_opt_int(self.validity_radius),
        ]
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SeriesKind {
    Finite,
    Thermo,
    Asymptotic,
}

impl SeriesKind {
    fn label(self) -> &'static str {
        match self {
            SeriesKind::Finite => "finite",
            SeriesKind::Thermo => "thermo",
            SeriesKind::Asymptotic => "asymptotic",
        }
    }
}

fn fitted_zeta(rs: &[i64], values: &[f64]) -> Option<f64> {
    if rs.len() < 3 || values.iter().any(|v| *v == 0.0) {
        return None;
    }
    let n = rs.len() as f64;
    let xbar = rs.iter().map(|&r| r as f64).sum::<f64>() / n;
    let ybar = values.iter().map(|v| v.abs().ln()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&r, v) in rs.iter().zip(values) {
        let x = r as f64 - xbar;
        num += x * (v.abs().ln() - ybar);
        den += x * x;
    }
    let slope = num / den;
    (slope != 0.0).then(|| -1.0 / slope)
}

fn series(
    spin: i64,
    qv: f64,
    pair: PairTag,
    kind: SeriesKind,
    len: i64,
    rs: &[i64],
    with_gap: bool,
) -> Result<Vec<Row>, String> {
    let q = Deformation::new(qv).map_err(|e| e.to_string())?;
    let p = pair.op();
    let mut values = Vec::with_capacity(rs.len());
    for &r in rs {
        let v = match kind {
            SeriesKind::Finite => two_point_finite(spin, q, len, r, p),
            SeriesKind::Thermo => two_point_thermo(spin, q, r, p),
            SeriesKind::Asymptotic => asymptotic(spin, q, p).map(|a| a.value(r)),
        }
        .map_err(|e| e.to_string())?;
        values.push(v);
    }
    let zeta = fitted_zeta(rs, &values);
    let radius = match kind {
        SeriesKind::Asymptotic => Some(validity_radius(spin, q).map_err(|e| e.to_string())?),
        _ => None,
    };
    let mut rows = Vec::with_capacity(rs.len());
    for (i, (&r, &v)) in rs.iter().zip(&values).enumerate() {
        let gap = if with_gap && kind == SeriesKind::Finite {
            Some((v - two_point_thermo(spin, q, r, p).map_err(|e| e.to_string())?).abs())
        } else {
            None
        };
        rows.push(Row {
            spin,
            q: qv,
            pair,
            mode: kind.label(),
            len: (kind == SeriesKind::Finite).then_some(len),
            r,
            value: v,
            log_abs: (v != 0.0).then(|| v.abs().ln()),
            local_ratio: values
                .get(i + 1)
                .and_then(|&next| (v != 0.0).then(|| next / v)),
            fitted_zeta: zeta,
            thermo_gap: gap,
            validity_radius: radius,
        });
    }
    Ok(rows)
}

pub fn run(args: &CorrelateArgs) -> Result<bool, String> {
    if args.spin < 1 {
        return Err("spin must be a positive integer".into());
    }
    let qs = grid::q_values(&args.q, &args.q_grid, crate::spectrum::DEFAULT_GRID)?;
    let rs = grid::int_values(&args.r, "r")?;
    if rs.iter().any(|&r| r < 2) {
        return Err("separation r must be at least 2 (operators on sites 1 and r)".into());
    }
    let kinds: &[SeriesKind] = match args.mode {
        ModeTag::Finite => &[SeriesKind::Finite],
        ModeTag::Thermo => &[SeriesKind::Thermo],
        ModeTag::Asymptotic => &[SeriesKind::Asymptotic],
        ModeTag::Both => &[SeriesKind::Finite, SeriesKind::Thermo],
    };
    let needs_ring = kinds.contains(&SeriesKind::Finite);
    if needs_ring {
        if args.len < 2 {
            return Err("ring length L must be at least 2".into());
        }
        if let Some(&worst) = rs.iter().max() {
            if worst > args.len {
                return Err(format!("separation {worst} exceeds ring length {}", args.len));
            }
        }
    }
    let with_gap = args.mode == ModeTag::Both;

    let tasks: Vec<(f64, SeriesKind)> = qs
        .iter()
        .flat_map(|&qv| kinds.iter().map(move |&k| (qv, k)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| e.to_string())?;
    let chunks: Vec<Result<Vec<Row>, String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(qv, kind)| series(args.spin, qv, args.pair, kind, args.len, &rs, with_gap))
            .collect()
    });
    let mut rows = Vec::new();
    for chunk in chunks {
        rows.extend(chunk?);
    }

    let config = Config {
        spin: args.spin,
        q_values: qs,
        pair: args.pair,
        mode: args.mode,
        r_values: rs,
        len: needs_ring.then_some(args.len),
    };
    output::write_output("correlate", &config, &rows, &args.out)?;
    Ok(true)
}
