use super::kernel::{check_update, decide, incoming_sum, variable_update};
use super::{check_inputs, check_syndrome_shape, log_priors, BpDecoder, DecoderConfig, Result, RoundOutcome};
use crate::ldpc::{MatrixSet, Syndrome};
use crate::rate_adapt::PuncturePlan;

/// Decoder state for `N >= 1` matrices.
#[derive(Debug, Clone)]
pub struct DecoderState {
    word: Vec<u8>,
    log_prior: Vec<f64>,
    shortened: Vec<bool>,
    /// Per matrix, indexed by row-major edge id.
    v2c: Vec<Vec<f64>>,
    c2v: Vec<Vec<f64>>,
    soft: Vec<f64>,
    iterations: usize,
    error_estimate: f64,
    llr_max: f64,
    scratch: Vec<f64>,
}

impl DecoderState {
    /// Sets up priors from `word` and `plan`, and every variable-to-check
    /// message to its variable's prior. The error estimate starts at `cfg.e`.
    pub fn init(word: &[u8], plan: &PuncturePlan, cfg: &DecoderConfig, set: &MatrixSet) -> Result<Self> {
        cfg.validate()?;
        check_inputs(set, word.len())?;
        let log_prior = log_priors(word, plan, cfg);
        let v2c: Vec<Vec<f64>> = set
            .matrices()
            .iter()
            .map(|h| h.edge_vars().iter().map(|&i| log_prior[i as usize]).collect())
            .collect();
        let c2v = set.matrices().iter().map(|h| vec![0.0; h.n_edges()]).collect();
        Ok(Self {
            word: word.to_vec(),
            shortened: (0..word.len()).map(|i| plan.is_shortened(i)).collect(),
            soft: log_prior.clone(),
            log_prior,
            v2c,
            c2v,
            iterations: 0,
            error_estimate: cfg.e,
            llr_max: cfg.llr_max,
            scratch: Vec::new(),
        })
    }

    /// Checked variant of [`BpDecoder::iterate`].
    pub fn try_iterate(&mut self, set: &MatrixSet, syndromes: &[Syndrome]) -> Result<()> {
        check_inputs(set, self.word.len())?;
        check_syndrome_shape(set, syndromes)?;
        self.iterate(set, syndromes);
        Ok(())
    }

    pub fn decode_round(
        &mut self,
        set: &MatrixSet,
        syndromes: &[Syndrome],
        cfg: &DecoderConfig,
        trace: Option<&mut dyn FnMut(&super::IterationTrace)>,
    ) -> RoundOutcome {
        super::decode_round(self, set, syndromes, cfg, trace)
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    /// Soft values from the last iteration (the priors before the first).
    pub fn soft(&self) -> &[f64] {
        &self.soft
    }

    pub fn v2c(&self, k: usize) -> &[f64] {
        &self.v2c[k]
    }

    pub fn c2v(&self, k: usize) -> &[f64] {
        &self.c2v[k]
    }
}

impl BpDecoder for DecoderState {
    fn iterate(&mut self, set: &MatrixSet, syndromes: &[Syndrome]) {
        for (k, (h, z)) in set.matrices().iter().zip(syndromes).enumerate() {
            let (v2c, c2v) = (&self.v2c[k], &mut self.c2v[k]);
            for j in 0..h.n_rows() {
                let r = h.row_edge_range(j);
                check_update(&v2c[r.clone()], &mut c2v[r], z.0[j], self.llr_max, &mut self.scratch);
            }
        }
        for i in 0..self.word.len() {
            let mut soft = self.log_prior[i];
            for (k, h) in set.matrices().iter().enumerate() {
                let edges = h.col_edges(i);
                let sum = incoming_sum(&self.c2v[k], edges);
                variable_update(self.log_prior[i] + sum, &self.c2v[k], &mut self.v2c[k], edges, self.llr_max);
                soft += sum;
            }
            self.soft[i] = soft;
            if !self.shortened[i] {
                self.word[i] = decide(soft);
            }
        }
        self.iterations += 1;
    }

    fn word(&self) -> &[u8] {
        &self.word
    }

    fn restore_word(&mut self, word: Vec<u8>) {
        debug_assert_eq!(word.len(), self.word.len());
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
