use super::kernel::{check_update, decide, incoming_sum, variable_update};
use super::{check_inputs, log_priors, BpDecoder, DecoderConfig, Result};
use crate::ldpc::{MatrixSet, ParityCheckMatrix, Syndrome};
use crate::rate_adapt::PuncturePlan;

/// Classic LLR-BP decoder for one matrix.
///
/// Used for SR and SRCR. When handed a [`MatrixSet`] it decodes against the
/// first member only.
#[derive(Debug, Clone)]
pub struct SingleDecoder {
    word: Vec<u8>,
    log_prior: Vec<f64>,
    shortened: Vec<bool>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    iterations: usize,
    error_estimate: f64,
    llr_max: f64,
    scratch: Vec<f64>,
}

impl SingleDecoder {
    pub fn init(word: &[u8], plan: &PuncturePlan, cfg: &DecoderConfig, h: &ParityCheckMatrix) -> Result<Self> {
        cfg.validate()?;
        if word.len() != h.n_cols() {
            return Err(super::Error::LengthMismatch {
                expected: h.n_cols(),
                got: word.len(),
            });
        }
        let log_prior = log_priors(word, plan, cfg);
        Ok(Self {
            word: word.to_vec(),
            shortened: (0..word.len()).map(|i| plan.is_shortened(i)).collect(),
            v2c: h.edge_vars().iter().map(|&i| log_prior[i as usize]).collect(),
            c2v: vec![0.0; h.n_edges()],
            log_prior,
            iterations: 0,
            error_estimate: cfg.e,
            llr_max: cfg.llr_max,
            scratch: Vec::new(),
        })
    }

    /// Same as [`Self::init`] taking the first matrix of `set`.
    pub fn init_from_set(word: &[u8], plan: &PuncturePlan, cfg: &DecoderConfig, set: &MatrixSet) -> Result<Self> {
        check_inputs(set, word.len())?;
        Self::init(word, plan, cfg, &set.matrices()[0])
    }

    pub fn iterate_matrix(&mut self, h: &ParityCheckMatrix, z: &Syndrome) {
        for j in 0..h.n_rows() {
            let r = h.row_edge_range(j);
            check_update(&self.v2c[r.clone()], &mut self.c2v[r], z.0[j], self.llr_max, &mut self.scratch);
        }
        for i in 0..h.n_cols() {
            let edges = h.col_edges(i);
            let total = self.log_prior[i] + incoming_sum(&self.c2v, edges);
            variable_update(total, &self.c2v, &mut self.v2c, edges, self.llr_max);
            if !self.shortened[i] {
                self.word[i] = decide(total);
            }
        }
        self.iterations += 1;
    }
}

impl BpDecoder for SingleDecoder {
    fn iterate(&mut self, set: &MatrixSet, syndromes: &[Syndrome]) {
        self.iterate_matrix(&set.matrices()[0], &syndromes[0]);
    }

    fn word(&self) -> &[u8] {
        &self.word
    }

    fn restore_word(&mut self, word: Vec<u8>) {
        self.word = word;
    }

    fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    fn set_error_estimate(&mut self, e: f64) {
        self.error_estimate = e;
    }

    fn iterations(&self) -> usize {
        self.iterations
    }
}
