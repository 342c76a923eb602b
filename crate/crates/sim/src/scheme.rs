//! Block generation and per-scheme dithering.

use ofdm_im::dither::{self, DitherPlan, DitherSolver, SolverOptions};
use ofdm_im::metrics;
use ofdm_im::{FrequencyBlock, TimeSignal, Transceiver};
use rand::Rng;

use crate::error::Result;
use crate::rng::{self, Purpose};
use crate::spec::{RunSpec, Scheme};

/// Shared, read-only state for processing blocks of one run.
pub struct Engine {
    pub spec: RunSpec,
    pub trx: Transceiver,
    pub solver: DitherSolver,
    pub options: SolverOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One transmitted block of one scheme.
#[derive(Debug, Clone)]
pub struct Transmitted {
    pub bits: Vec<u8>,
    /// Undithered modulated block.
    pub block: FrequencyBlock,
    /// Block with the dither added on idle subcarriers.
    pub dithered: FrequencyBlock,
    pub signal: TimeSignal,
    pub plan: Option<DitherPlan>,
    pub solve: Option<SolveStats>,
}

impl Engine {
    pub fn new(spec: &RunSpec) -> Result<Self> {
        spec.validate()?;
        let cfg = spec.system_config()?;
        let trx = Transceiver::qam(cfg)?.with_policy(spec.detector.into());
        let solver = DitherSolver::new(cfg.subcarriers())?;
        Ok(Self { spec: spec.clone(), trx, solver, options: spec.solver.options() })
    }

    pub fn bits(&self, block: usize) -> Vec<u8> {
        let mut rng = rng::stream(self.spec.seed, Purpose::Data, 0, block);
        (0..self.trx.config().block_bits()).map(|_| u8::from(rng.random::<bool>())).collect()
    }

    pub fn plan(&self, scheme: Scheme, block: &FrequencyBlock) -> Result<Option<DitherPlan>> {
        let cfg = self.trx.config();
        let cons = self.trx.constellation();
        Ok(match scheme {
            Scheme::Original => None,
            Scheme::SingleLevel => Some(dither::build_single_level_plan(block, cfg, self.spec.radius)?),
            Scheme::Multilevel if self.spec.allow_margin_violation => {
                Some(dither::build_plan_unchecked(block, cfg, cons, self.spec.r1)?)
            }
            Scheme::Multilevel => Some(dither::build_plan(block, cfg, cons, self.spec.r1)?),
        })
    }

    /// Lower bound on `ν` guaranteed by the scheme's radii.
    pub fn nu_bound(&self, scheme: Scheme) -> f64 {
        let a1 = self.trx.constellation().levels()[0];
        match scheme {
            Scheme::Original => a1,
            Scheme::SingleLevel => a1 - self.spec.radius,
            Scheme::Multilevel => a1 - self.spec.r1,
        }
    }

    pub fn transmit(&self, scheme: Scheme, index: usize) -> Result<Transmitted> {
        let bits = self.bits(index);
        let block = self.trx.modulate(&bits)?;
        let x = self.trx.transmit(&block)?;
        let plan = self.plan(scheme, &block)?;
        let Some(plan) = plan else {
            return Ok(Transmitted { bits, dithered: block.clone(), block, signal: x, plan: None, solve: None });
        };
        let sol = if self.options.restarts > 1 {
            let mut rng = rng::stream(self.spec.seed, Purpose::Restart, 0, index);
            self.solver.solve_multistart(&x, &plan, &self.options, &mut rng)?
        } else {
            self.solver.solve(&x, &plan, &self.options)?
        };
        let dithered = block.with_dither(&sol.dither)?;
        let solve = SolveStats { objective: sol.objective, iterations: sol.iterations, converged: sol.converged };
        Ok(Transmitted { bits, block, dithered, signal: sol.signal, plan: Some(plan), solve: Some(solve) })
    }

    /// Peak power at the configured oversampling factor.
    pub fn peak_power(&self, tx: &Transmitted) -> Result<f64> {
        if self.spec.oversample == 1 {
            Ok(tx.signal.peak_power())
        } else {
            Ok(ofdm_im::transform::oversampled_peak(tx.dithered.values(), self.spec.oversample)?)
        }
    }

    pub fn realized_nu(&self, tx: &Transmitted) -> Result<f64> {
        Ok(metrics::realized_nu(&tx.dithered, self.trx.config(), self.trx.constellation())?)
    }
}
