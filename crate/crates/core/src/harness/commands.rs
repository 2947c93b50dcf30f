use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ResolvedChannel, Scheme};
use super::csv::{cell, num, wilson_interval};
use crate::csir::{
    default_levels_grid, default_top_grid, design_equalprob_quantizer, gap_bound_csir_continuous, optimize_quantizer,
    run_csir_trial, universality_gap, MimoLink, QuantizerOptimum,
};
use crate::csit::{run_siso_trial, snr_for_rate_fraction, SisoLink, TrialOutcome};
use crate::error::{Error, Result};
use crate::fading::{BlockFadingProcess, DeltaSchedule, DiscreteFadingDistribution, FadingLaw, RayleighFading};
use crate::gap::{overflow_gap, GapReport};
use crate::lattice::GeneratorSource;
use crate::power::{draw_channel_matrices, ergodic_capacity_csit, mimo_capacity_white_on, waterfill_scalar};
use crate::rng::{derive_seed, substream};

pub const CAPACITY_HEADER: &str = "snr_db,capacity,stderr";
pub const GAP_HEADER: &str = "snr_db,capacity,gap_bound,rate,L_star,qL_star,term_quant,term_bins,term_tail";
pub const TRIAL_HEADER: &str = "seed,n,q,rate,backoff,snr_db,decoded_ok,noise_metric";
pub const SUMMARY_HEADER: &str = "snr_db,backoff,trials,errors,error_rate,wilson_lo,wilson_hi";
pub const FIG1_HEADER: &str = "snr_db,white_capacity,proposed_rate";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Capacity,
    Gap,
    Quantize,
    Simulate,
    Fig1,
    Fig2,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Output {
    pub table: String,
    pub summary: Option<String>,
    /// Rows that could not be computed; their numeric fields are left empty.
    pub failed_rows: Vec<String>,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Output> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match command {
        Command::Capacity => cmd_capacity(cfg),
        Command::Gap => cmd_gap(cfg),
        Command::Quantize => cmd_quantize(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Fig1 => cmd_fig1(cfg),
        Command::Fig2 => cmd_fig2(cfg),
    })
}

fn siso_discrete(ch: &ResolvedChannel) -> Option<&DiscreteFadingDistribution> {
    if ch.is_siso() {
        ch.law().as_discrete()
    } else {
        None
    }
}

fn rayleigh_of(ch: &ResolvedChannel) -> Result<RayleighFading> {
    match ch.law() {
        FadingLaw::Rayleigh(r) if ch.is_siso() => Ok(*r),
        _ => Err(Error::Config("this command needs a SISO rayleigh channel".into())),
    }
}

/// White-input capacity on one set of channel draws shared by every SNR point.
fn white_capacity_curve(ch: &ResolvedChannel, grid: &[f64], draws: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let p = &ch.process;
    let mats = draw_channel_matrices(&p.law, p.tx_antennas, p.rx_antennas, draws, substream(seed, 7))?;
    grid.par_iter()
        .map(|&db| mimo_capacity_white_on(&mats, db_to_linear(db)).map(|c| (c.mean, c.stderr)))
        .collect()
}

pub fn cmd_capacity(cfg: &ExperimentConfig) -> Result<Output> {
    let ch = cfg.channel()?;
    let grid = cfg.snr_grid()?;
    let values: Vec<(f64, f64)> = match (cfg.scheme, siso_discrete(&ch)) {
        (Scheme::Csit, Some(dist)) => grid
            .iter()
            .map(|&db| ergodic_capacity_csit(dist, db_to_linear(db)).map(|c| (c, 0.0)))
            .collect::<Result<_>>()?,
        _ => white_capacity_curve(&ch, grid, cfg.draws, cfg.master_seed)?,
    };
    let mut table = format!("{CAPACITY_HEADER}\n");
    for (db, (c, se)) in grid.iter().zip(values) {
        writeln!(table, "{},{},{}", num(*db), num(c), num(se)).unwrap();
    }
    Ok(Output { table, ..Default::default() })
}

fn gap_row(db: f64, report: &GapReport, design: Option<(usize, f64)>) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        num(db),
        cell(report.capacity),
        num(report.gap),
        cell(report.rate),
        design.map(|d| d.0.to_string()).unwrap_or_default(),
        cell(design.map(|d| d.1)),
        cell(report.term("term_quant")),
        cell(report.term("term_bins")),
        cell(report.term("term_tail")),
    )
}

fn empty_gap_row(db: f64) -> String {
    format!("{},,,,,,,,", num(db))
}

pub fn cmd_gap(cfg: &ExperimentConfig) -> Result<Output> {
    let ch = cfg.channel()?;
    let grid = cfg.snr_grid()?;
    let p = &ch.process;
    let mut table = format!("{GAP_HEADER}\n");
    match p.law.clone() {
        FadingLaw::Rayleigh(r) => {
            rayleigh_of(&ch)?;
            let q = cfg.quantizer.clone().unwrap_or_default();
            let (levels, top) = match (q.levels, q.top) {
                (Some(l), Some(t)) => (l, t),
                _ => return Err(Error::Config("gap on rayleigh fading needs [quantizer] levels and top".into())),
            };
            let design = design_equalprob_quantizer(&r, levels, top)?;
            for &db in grid {
                let rep = gap_bound_csir_continuous(&r, db_to_linear(db), p.coherence, &design)?;
                table.push_str(&gap_row(db, &rep, Some((levels, top))));
                table.push('\n');
            }
        }
        FadingLaw::Discrete(dist) => match cfg.scheme {
            Scheme::Csir => {
                let u = universality_gap(p.tx_antennas, p.rx_antennas, p.coherence, &p.law)?;
                let caps = white_capacity_curve(&ch, grid, cfg.draws, cfg.master_seed)?;
                for (&db, (c, _)) in grid.iter().zip(caps) {
                    let rep = GapReport::from_terms([("term_quant", u.gap_bits)]).with_capacity(c);
                    table.push_str(&gap_row(db, &rep, None));
                    table.push('\n');
                }
            }
            Scheme::Csit => {
                if !ch.is_siso() {
                    return Err(Error::Config("csit gap is defined for SISO channels".into()));
                }
                let n = cfg.lattice()?.n;
                let n_out = DeltaSchedule::default().n_out(n);
                for &db in grid {
                    let rho = db_to_linear(db);
                    let wf = waterfill_scalar(&dist, rho)?;
                    let peak = dist.support().iter().zip(&wf.allocations).map(|(h, p)| p * h * h).fold(0.0, f64::max);
                    let g = overflow_gap(n, n_out, peak, None)?;
                    let rep = GapReport::from_terms([("overflow", g.total())]).with_capacity(ergodic_capacity_csit(&dist, rho)?);
                    table.push_str(&gap_row(db, &rep, None));
                    table.push('\n');
                }
            }
        },
    }
    Ok(Output { table, ..Default::default() })
}

fn quantizer_grids(cfg: &ExperimentConfig, r: &RayleighFading) -> (Vec<usize>, Vec<f64>) {
    let q = cfg.quantizer.clone().unwrap_or_default();
    (q.levels_grid.unwrap_or_else(default_levels_grid), q.top_grid.unwrap_or_else(|| default_top_grid(r)))
}

fn optimized_gap_table(grid: &[f64], r: &RayleighFading, coherence: usize, levels: &[usize], tops: &[f64]) -> Output {
    let mut out = Output { table: format!("{GAP_HEADER}\n"), ..Default::default() };
    for &db in grid {
        match optimize_quantizer(r, db_to_linear(db), coherence, levels, tops) {
            Ok(QuantizerOptimum { levels, top, report }) => out.table.push_str(&gap_row(db, &report, Some((levels, top)))),
            Err(e) => {
                out.failed_rows.push(format!("snr_db={db}: {e}"));
                out.table.push_str(&empty_gap_row(db));
            }
        }
        out.table.push('\n');
    }
    out
}

pub fn cmd_quantize(cfg: &ExperimentConfig) -> Result<Output> {
    let ch = cfg.channel()?;
    let r = rayleigh_of(&ch)?;
    let (levels, tops) = quantizer_grids(cfg, &r);
    Ok(optimized_gap_table(cfg.snr_grid()?, &r, ch.process.coherence, &levels, &tops))
}

pub fn cmd_fig2(cfg: &ExperimentConfig) -> Result<Output> {
    let (r, coherence) = match &cfg.channel {
        Some(_) => {
            let ch = cfg.channel()?;
            (rayleigh_of(&ch)?, ch.process.coherence)
        }
        None => (RayleighFading::unit(), 20),
    };
    let grid = cfg.snr_grid_db.clone().unwrap_or_else(|| (0..=6).map(|k| 10.0 * k as f64).collect());
    let (levels, tops) = quantizer_grids(cfg, &r);
    Ok(optimized_gap_table(&grid, &r, coherence, &levels, &tops))
}

/// Two-by-two channel, entries uniform over 1000 levels in `[-5, 5]`, `b = 20`.
pub fn fig1_channel() -> ResolvedChannel {
    let law = FadingLaw::Discrete(DiscreteFadingDistribution::uniform_grid(1000, -5.0, 5.0).expect("valid grid"));
    ResolvedChannel { process: BlockFadingProcess::mimo(law, 20, 2, 2) }
}

pub fn cmd_fig1(cfg: &ExperimentConfig) -> Result<Output> {
    let ch = match &cfg.channel {
        Some(_) => cfg.channel()?,
        None => fig1_channel(),
    };
    let grid = cfg.snr_grid_db.clone().unwrap_or_else(|| (0..=8).map(|k| 5.0 * k as f64).collect());
    let p = &ch.process;
    let gap = universality_gap(p.tx_antennas, p.rx_antennas, p.coherence, &p.law)?.gap_bits;
    let caps = white_capacity_curve(&ch, &grid, cfg.draws, cfg.master_seed)?;
    let mut table = format!("{FIG1_HEADER}\n");
    for (db, (c, _)) in grid.iter().zip(caps) {
        writeln!(table, "{},{},{}", num(*db), num(c), num(c - gap)).unwrap();
    }
    Ok(Output { table, ..Default::default() })
}

/// One operating point of a simulation sweep.
struct OperatingPoint {
    rho: f64,
    backoff: f64,
}

fn bisect_rho(target: f64, capacity: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    if capacity(2f64.powf(hi))? < target {
        return Err(Error::InvalidParameter(format!("rate {target} is beyond reach")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if capacity(2f64.powf(mid))? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(2f64.powf(hi))
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Output> {
    let ch = cfg.channel()?;
    let lat = cfg.lattice()?;
    let trials = cfg.trials()?;
    let p = ch.process.clone();
    let generator = GeneratorSource::Seeded(lat.generator_seed);

    let (points, rate, run_trial): (Vec<OperatingPoint>, f64, Box<dyn Fn(f64, u64) -> Result<TrialOutcome> + Sync>) = match cfg.scheme {
        Scheme::Csit => {
            let dist = siso_discrete(&ch)
                .ok_or_else(|| Error::Config("csit simulation needs a SISO discrete channel".into()))?
                .clone();
            let rate = (lat.q as f64).log2() / lat.n as f64;
            let points = match (&cfg.backoffs, &cfg.snr_grid_db) {
                (Some(b), _) => b
                    .iter()
                    .map(|&f| snr_for_rate_fraction(&dist, rate, f).map(|rho| OperatingPoint { rho, backoff: f }))
                    .collect::<Result<_>>()?,
                (None, Some(g)) => g
                    .iter()
                    .map(|&db| {
                        let rho = db_to_linear(db);
                        ergodic_capacity_csit(&dist, rho).map(|c| OperatingPoint { rho, backoff: rate / c })
                    })
                    .collect::<Result<_>>()?,
                (None, None) => return Err(Error::Config("simulate needs backoffs or snr_grid_db".into())),
            };
            let (n, q, coh, noise) = (lat.n, lat.q, p.coherence, cfg.noise_variance);
            let run = move |rho: f64, seed: u64| {
                let link = SisoLink::new(n, q, generator.clone(), dist.clone(), coh, rho, noise)?;
                run_siso_trial(&link, seed)
            };
            (points, rate, Box::new(run))
        }
        Scheme::Csir => {
            let m = p.tx_antennas;
            if lat.n % m != 0 {
                return Err(Error::Config(format!("lattice n = {} is not a multiple of M = {m}", lat.n)));
            }
            let rate = (lat.q as f64).log2() / (lat.n / m) as f64;
            let mats = draw_channel_matrices(&p.law, m, p.rx_antennas, cfg.draws, substream(cfg.master_seed, 7))?;
            let cap = |rho: f64| mimo_capacity_white_on(&mats, rho).map(|c| c.mean);
            let points = match (&cfg.backoffs, &cfg.snr_grid_db) {
                (Some(b), _) => b
                    .iter()
                    .map(|&f| bisect_rho(rate / f, cap).map(|rho| OperatingPoint { rho, backoff: f }))
                    .collect::<Result<_>>()?,
                (None, Some(g)) => g
                    .iter()
                    .map(|&db| {
                        let rho = db_to_linear(db);
                        cap(rho).map(|c| OperatingPoint { rho, backoff: rate / c })
                    })
                    .collect::<Result<_>>()?,
                (None, None) => return Err(Error::Config("simulate needs backoffs or snr_grid_db".into())),
            };
            let (uses, q, noise) = (lat.n / m, lat.q, cfg.noise_variance);
            let run = move |rho: f64, seed: u64| {
                let link = MimoLink::new(uses, q, generator.clone(), p.clone(), rho, noise)?;
                run_csir_trial(&link, seed)
            };
            (points, rate, Box::new(run))
        }
    };

    let mut table = format!("{TRIAL_HEADER}\n");
    let mut summary = format!("{SUMMARY_HEADER}\n");
    for pt in &points {
        let snr_db = 10.0 * pt.rho.log10();
        let outcomes: Vec<(u64, TrialOutcome)> = (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(cfg.master_seed, i);
                run_trial(pt.rho, seed).map(|o| (seed, o))
            })
            .collect::<Result<_>>()?;
        let mut errors = 0usize;
        for (seed, o) in &outcomes {
            errors += usize::from(!o.decoded_ok);
            writeln!(
                table,
                "{seed},{},{},{},{},{},{},{}",
                lat.n,
                lat.q,
                num(rate),
                num(pt.backoff),
                num(snr_db),
                u8::from(o.decoded_ok),
                num(o.noise_metric)
            )
            .unwrap();
        }
        let (lo, hi) = wilson_interval(errors, trials);
        writeln!(
            summary,
            "{},{},{trials},{errors},{},{},{}",
            num(snr_db),
            num(pt.backoff),
            num(errors as f64 / trials as f64),
            num(lo),
            num(hi)
        )
        .unwrap();
    }
    Ok(Output { table, summary: Some(summary), failed_rows: Vec::new() })
}
