//! A modem bundling configuration, constellation, pattern table and transform.

use alloc::vec::Vec;

use crate::channel::{self, Detection, IllegalPatternPolicy, ReceiveResult};
use crate::constellation::make_qam;
use crate::index::{self, build_legal_set};
use crate::{Constellation, Dft, Error, FrequencyBlock, LegalPatternSet, Result, SystemConfig, TimeSignal};

#[derive(Debug, Clone)]
pub struct Transceiver {
    cfg: SystemConfig,
    cons: Constellation,
    set: LegalPatternSet,
    dft: Dft,
    policy: IllegalPatternPolicy,
}

impl Transceiver {
    pub fn new(cfg: SystemConfig, cons: Constellation) -> Result<Self> {
        if cons.order() != cfg.order() {
            return Err(Error::Param { field: "M", reason: "constellation order differs from configuration" });
        }
        Ok(Self {
            set: build_legal_set(cfg.subblock_len(), cfg.active_per_subblock())?,
            dft: Dft::new(cfg.subcarriers())?,
            cfg,
            cons,
            policy: IllegalPatternPolicy::default(),
        })
    }

    /// Square QAM of the configured order.
    pub fn qam(cfg: SystemConfig) -> Result<Self> {
        Self::new(cfg, make_qam(cfg.order())?)
    }

    pub fn with_policy(mut self, policy: IllegalPatternPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn constellation(&self) -> &Constellation {
        &self.cons
    }

    pub fn legal_set(&self) -> &LegalPatternSet {
        &self.set
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    pub fn policy(&self) -> IllegalPatternPolicy {
        self.policy
    }

    pub fn modulate(&self, bits: &[u8]) -> Result<FrequencyBlock> {
        index::modulate_block(bits, &self.cfg, &self.cons, &self.set)
    }

    pub fn transmit(&self, block: &FrequencyBlock) -> Result<TimeSignal> {
        self.dft.idft_block(block)
    }

    /// Genie disassembly of a noiseless block.
    pub fn disassemble(&self, block: &FrequencyBlock) -> Result<Vec<u8>> {
        index::disassemble_block(block, &self.cfg, &self.cons, &self.set)
    }

    pub fn detect(&self, y: &TimeSignal) -> Result<Detection> {
        channel::detect_block(y, &self.dft, &self.cfg, &self.cons, &self.set, self.policy)
    }

    pub fn receive(&self, y: &TimeSignal, tx_bits: &[u8]) -> Result<ReceiveResult> {
        channel::receive_block(y, tx_bits, &self.dft, &self.cfg, &self.cons, &self.set, self.policy)
    }
}
