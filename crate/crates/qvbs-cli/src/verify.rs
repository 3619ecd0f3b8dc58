//! `verify`: brute-force cross-validation on small rings. Materializes the
//! ground state, checks both construction routes against the transfer trace,
//! applies the high-spin projectors and the Hamiltonian, matches correlators
//! against dense contraction and runs the lowering-operator grid.

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use qvbs::correlator::{one_point_finite, two_point_finite, OnePointOp, PairOp};
use qvbs::matrix::{vec_norm, DMat};
use qvbs::oracle::{
    apply_hamiltonian, apply_two_site, compare_routes, mps_state, oracle_correlator, projector,
    verify_proposition1, Couplings, OracleObservable,
};
use qvbs::Deformation;

use crate::grid;
use crate::output::{self, OutArgs, TableRow};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Site spin S (integer, S >= 1)
    #[arg(long)]
    pub spin: i64,
    /// Single q or comma-separated list; default 0.5,1,2
    #[arg(long, conflicts_with = "q_grid")]
    pub q: Option<String>,
    /// Grid start:stop:count[:log|lin]
    #[arg(long)]
    pub q_grid: Option<String>,
    /// Ring lengths, e.g. 2..6
    #[arg(long = "L", default_value = "2..6")]
    pub lens: String,
    /// Run only the lowering-operator grid
    #[arg(long)]
    pub prop1: bool,
    /// Largest lowering count per total spin J (default 2J+1, the vanishing case)
    #[arg(long)]
    pub n_max: Option<i64>,
    /// Extra randomized annihilation checks with skewed couplings (0 = none)
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
    /// Seed for the sampled checks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
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
    #[serde(rename = "L_values")]
    lens: Vec<i64>,
    prop1: bool,
    n_max: Option<i64>,
    samples: u64,
    seed: u64,
}

#[derive(Serialize)]
struct Row {
    check: &'static str,
    detail: String,
    spin: i64,
    q: f64,
    #[serde(rename = "L")]
    len: Option<i64>,
    cases: i64,
    max_residual: f64,
    tolerance: f64,
    pass: bool,
}

impl TableRow for Row {
    const HEADERS: &'static [&'static str] = &[
        "check",
        "detail",
        "spin",
        "q",
        "L",
        "cases",
        "max_residual",
        "tolerance",
        "pass",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.check.to_string(),
            self.detail.clone(),
            self.spin.to_string(),
            output::fmt_float(self.q),
            output::fmt_opt_int(self.len),
            self.cases.to_string(),
            output::fmt_float(self.max_residual),
            output::fmt_float(self.tolerance),
            self.pass.to_string(),
        ]
    }
}

fn row(
    check: &'static str,
    detail: String,
    spin: i64,
    q: f64,
    len: Option<i64>,
    cases: i64,
    max_residual: f64,
    tolerance: f64,
) -> Row {
    Row {
        check,
        detail,
        spin,
        q,
        len,
        cases,
        max_residual,
        tolerance,
        pass: max_residual <= tolerance,
    }
}

fn lowering_rows(spin: i64, qv: f64, n_max: Option<i64>, per_j: bool) -> Result<Vec<Row>, String> {
    let q = Deformation::new(qv).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut cases = 0i64;
    for j_tot in 0..=2 * spin {
        let top = n_max.unwrap_or(2 * j_tot + 1);
        let mut here = 0.0f64;
        for n in 0..=top {
            let rep = verify_proposition1(spin, j_tot, n, q).map_err(|e| e.to_string())?;
            here = here.max(rep.mismatch);
            cases += 1;
        }
        worst = worst.max(here);
        if per_j {
            rows.push(row("lowering", format!("J={j_tot}"), spin, qv, None, top + 1, here, 1e-10));
        }
    }
    if !per_j {
        rows.push(row("lowering", String::new(), spin, qv, None, cases, worst, 1e-10));
    }
    Ok(rows)
}

fn default_suite(spin: i64, qv: f64, lens: &[i64]) -> Result<Vec<Row>, String> {
    let q = Deformation::new(qv).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();

    let family: Vec<DMat> = (0..=2 * spin)
        .map(|j| projector(spin, j, q))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let dim = family[0].nrows();
    let mut worst = 0.0f64;
    let mut sum = DMat::zeros(dim, dim);
    for (ja, pa) in family.iter().enumerate() {
        for (jb, pb) in family.iter().enumerate() {
            let want = if ja == jb { pa.clone() } else { DMat::zeros(dim, dim) };
            worst = worst.max(pa.mul(pb).sub(&want).max_abs());
        }
        sum = sum.add(pa);
    }
    worst = worst.max(sum.sub(&DMat::identity(dim)).max_abs());
    let cases = (family.len() * family.len() + 1) as i64;
    rows.push(row("projector-algebra", String::new(), spin, qv, None, cases, worst, 1e-10));

    rows.extend(lowering_rows(spin, qv, None, false)?);

    for &len in lens {
        let cmp = compare_routes(spin, q, len).map_err(|e| e.to_string())?;
        let worst = cmp.state_diff.max(cmp.poly_vs_transfer).max(cmp.mps_vs_transfer);
        rows.push(row("state-routes", String::new(), spin, qv, Some(len), 3, worst, 1e-10));

        let psi = mps_state(spin, q, len).map_err(|e| e.to_string())?;
        let norm = psi.norm_sq().sqrt();
        let mut worst = 0.0f64;
        let mut cases = 0i64;
        for j in spin + 1..=2 * spin {
            let p = projector(spin, j, q).map_err(|e| e.to_string())?;
            for bond in 0..len {
                let out = apply_two_site(spin, len, bond, &p, psi.amplitudes())
                    .map_err(|e| e.to_string())?;
                worst = worst.max(vec_norm(&out) / norm);
                cases += 1;
            }
        }
        rows.push(row("annihilation", String::new(), spin, qv, Some(len), cases, worst, 1e-8));

        let direct = one_point_finite(spin, q, len, OnePointOp::Sz).map_err(|e| e.to_string())?;
        let dense = oracle_correlator(spin, q, len, OracleObservable::Sz)
            .map_err(|e| e.to_string())?;
        let worst = direct.abs().max(dense.abs());
        rows.push(row("one-point", String::new(), spin, qv, Some(len), 2, worst, 1e-12));

        let mut worst = 0.0f64;
        let mut cases = 0i64;
        for r in 2..=len {
            for (pair, obs) in [
                (PairOp::Zz, OracleObservable::Zz { r }),
                (PairOp::Pm, OracleObservable::Pm { r }),
            ] {
                let a = two_point_finite(spin, q, len, r, pair).map_err(|e| e.to_string())?;
                let b = oracle_correlator(spin, q, len, obs).map_err(|e| e.to_string())?;
                worst = worst.max((a - b).abs());
                cases += 1;
            }
        }
        rows.push(row("correlators", String::new(), spin, qv, Some(len), cases, worst, 1e-10));
    }
    Ok(rows)
}

struct Sample {
    index: u64,
    q: f64,
    couplings: Couplings,
}

fn draw_samples(spin: i64, lens: &[i64], samples: u64, seed: u64) -> Result<Vec<Sample>, String> {
    let len = *lens.iter().max().expect("validated non-empty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples as usize);
    for index in 0..samples {
        let q = rng.gen_range(0.25f64.ln()..=4.0f64.ln()).exp();
        let mut couplings = Couplings::uniform();
        for j in spin + 1..=2 * spin {
            for bond in 1..=len {
                let c = rng.gen_range(0.5f64.ln()..=2.0f64.ln()).exp();
                couplings.set(j, bond, c).map_err(|e| e.to_string())?;
            }
        }
        out.push(Sample { index, q, couplings });
    }
    Ok(out)
}

fn sampled_row(spin: i64, len: i64, sample: &Sample) -> Result<Row, String> {
    let q = Deformation::new(sample.q).map_err(|e| e.to_string())?;
    let psi = mps_state(spin, q, len).map_err(|e| e.to_string())?;
    let image = apply_hamiltonian(spin, q, len, &sample.couplings, psi.amplitudes())
        .map_err(|e| e.to_string())?;
    let residual = vec_norm(&image) / psi.norm_sq().sqrt();
    let cases = (spin * len) as i64;
    Ok(row(
        "sampled-annihilation",
        format!("sample={}", sample.index),
        spin,
        sample.q,
        Some(len),
        cases,
        residual,
        1e-8,
    ))
}

pub fn run(args: &VerifyArgs) -> Result<bool, String> {
    if args.spin < 1 {
        return Err("spin must be a positive integer".into());
    }
    if let Some(n) = args.n_max {
        if n < 0 {
            return Err("n-max must be non-negative".into());
        }
        if !args.prop1 {
            return Err("--n-max only applies together with --prop1".into());
        }
    }
    // the log grid lands exactly on 0.5, 1, 2
    let qs = grid::q_values(&args.q, &args.q_grid, "0.5:2:3:log")?;
    let lens = grid::int_values(&args.lens, "L")?;
    if lens.iter().any(|&l| l < 2) {
        return Err("ring length L must be at least 2".into());
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| e.to_string())?;
    let chunks: Vec<Result<Vec<Row>, String>> = pool.install(|| {
        qs.par_iter()
            .map(|&qv| {
                if args.prop1 {
                    lowering_rows(args.spin, qv, args.n_max, true)
                } else {
                    default_suite(args.spin, qv, &lens)
                }
            })
            .collect()
    });
    let mut rows = Vec::new();
    for chunk in chunks {
        rows.extend(chunk?);
    }

    if !args.prop1 && args.samples > 0 {
        let len = *lens.iter().max().expect("validated non-empty");
        let samples = draw_samples(args.spin, &lens, args.samples, args.seed)?;
        let sampled: Vec<Result<Row, String>> = pool.install(|| {
            samples.par_iter().map(|s| sampled_row(args.spin, len, s)).collect()
        });
        for r in sampled {
            rows.push(r?);
        }
    }

    for r in rows.iter().filter(|r| !r.pass) {
        eprintln!(
            "failed: {} {} (S={} q={} residual {:.3e} > {:.1e})",
            r.check, r.detail, r.spin, r.q, r.max_residual, r.tolerance
        );
    }

    let config = Config {
        spin: args.spin,
        q_values: qs,
        lens,
        prop1: args.prop1,
        n_max: args.n_max,
        samples: args.samples,
        seed: args.seed,
    };
    let all_pass = rows.iter().all(|r| r.pass);
    output::write_output("verify", &config, &rows, &args.out)?;
    Ok(all_pass)
}
