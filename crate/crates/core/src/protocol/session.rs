use std::sync::Arc;

use serde::Serialize;

use super::message::{Message, MessageKind};
use super::transport::{channel_pair, Transport};
use super::{choose_rate, Error, Result, SessionConfig, SessionResult};
use crate::decoder::{self, BpDecoder, DecoderConfig, DecoderState, RoundOutcome, SingleDecoder};
use crate::harness::metrics::efficiency;
use crate::ldpc::{MatrixSet, Syndrome};
use crate::rate_adapt::{self, convert_p2s, initial_budget, PuncturePlan};
use crate::seed::{self, label, Rng};
use rand::Rng as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    fn peer(self) -> Role {
        match self {
            Role::Alice => Role::Bob,
            Role::Bob => Role::Alice,
        }
    }
}

impl SessionConfig {
    /// Copy of the config whose local seed is specific to `role`, so the two
    /// parties never share private randomness.
    pub fn for_role(&self, role: Role) -> SessionConfig {
        let tag = match role {
            Role::Alice => label("alice"),
            Role::Bob => label("bob"),
        };
        SessionConfig {
            local_seed: seed::derive(self.local_seed, &[tag]),
            ..self.clone()
        }
    }
}

/// What a party wants to do next.
#[derive(Debug)]
pub enum Step {
    Send(Message),
    /// Wait for the peer's next message.
    Wait,
    SendAndFinish(Message, SessionResult),
    Finish(SessionResult),
}

pub trait Party {
    fn role(&self) -> Role;
    fn start(&mut self) -> Result<Step>;
    fn handle(&mut self, msg: Message) -> Result<Step>;
}

/// Rate, budget and positions both parties derive from the shared seed.
#[derive(Debug, Clone)]
struct Agreement {
    set: Arc<MatrixSet>,
    plan: PuncturePlan,
}

/// `Ok(Err(reason))` means the session fails before any message is sent.
fn agree(e: f64, cfg: &SessionConfig) -> Result<std::result::Result<Agreement, String>> {
    let rates: Vec<f64> = cfg.rates.iter().map(|s| s.rate()).collect();
    let idx = match choose_rate(e, cfg.f_d, &rates) {
        Ok(i) => i,
        Err(err) => return Ok(Err(err.to_string())),
    };
    let set = Arc::clone(&cfg.rates[idx]);
    let plan = if cfg.scheme.is_rate_compatible() {
        let p0 = match initial_budget(set.n_rows(), set.n_cols(), e, cfg.f_d) {
            Ok(p0) => p0,
            Err(err @ rate_adapt::Error::RateInadmissible { .. }) => return Ok(Err(err.to_string())),
            Err(err) => return Err(err.into()),
        };
        let mut rng = seed::rng(cfg.shared_seed, &[label("plan")]);
        PuncturePlan::derive(&set, p0, &mut rng)?
    } else {
        PuncturePlan::none()
    };
    Ok(Ok(Agreement { set, plan }))
}

/// Overwrites every planned position with locally drawn bits.
fn puncture(key: &[u8], plan: &PuncturePlan, rng: &mut Rng) -> Vec<u8> {
    let mut word = key.to_vec();
    for &v in &plan.order {
        word[v] = rng.gen::<u8>() & 1;
    }
    word
}

fn strip(word: &[u8], plan: &PuncturePlan) -> Vec<u8> {
    let mut drop = vec![false; word.len()];
    for &v in &plan.order {
        drop[v] = true;
    }
    word.iter().zip(drop).filter(|(_, d)| !d).map(|(&b, _)| b).collect()
}

fn check_key(key: &[u8], cfg: &SessionConfig) -> Result<()> {
    cfg.validate()?;
    if key.len() != cfg.n() {
        return Err(Error::Config(format!("key has {} bits, code length is {}", key.len(), cfg.n())));
    }
    if key.iter().any(|&b| b > 1) {
        return Err(Error::Config("key bits must be 0 or 1".into()));
    }
    Ok(())
}

struct Tally<'a> {
    cfg: &'a SessionConfig,
    e: f64,
    rounds: usize,
    iterations: usize,
}

impl Tally<'_> {
    fn failed(&self, agreement: Option<&Agreement>, reason: String) -> SessionResult {
        let mut r = self.base(agreement);
        r.failure = Some(reason);
        r
    }

    fn succeeded(&self, agreement: &Agreement, key: Vec<u8>) -> SessionResult {
        let mut r = self.base(Some(agreement));
        r.success = true;
        r.key = key;
        r.efficiency = efficiency(r.m, r.n, r.final_p, r.final_s, self.e);
        r
    }

    fn base(&self, agreement: Option<&Agreement>) -> SessionResult {
        let (m, rate, p0, final_p, final_s) = match agreement {
            Some(a) => (
                a.set.n_rows(),
                Some(a.set.rate()),
                a.plan.p0,
                a.plan.punctured.len(),
                a.plan.shortened.len(),
            ),
            None => (0, None, 0, 0, 0),
        };
        let syndrome_bits = if self.rounds > 0 { m * self.cfg.n_matrices } else { 0 };
        SessionResult {
            success: false,
            key: Vec::new(),
            scheme: self.cfg.scheme,
            n: self.cfg.n(),
            m,
            n_matrices: self.cfg.n_matrices,
            rate,
            p0,
            rounds: self.rounds,
            iterations: self.iterations,
            final_p,
            final_s,
            disclosed_bits: syndrome_bits + final_s,
            efficiency: None,
            failure: None,
        }
    }
}

/// Alice: computes syndromes and answers failed rounds with reveals.
pub struct Alice {
    cfg: SessionConfig,
    e: f64,
    key: Vec<u8>,
    agreement: Option<Agreement>,
    word: Vec<u8>,
    rounds: usize,
    p2s_rng: Rng,
}

impl Alice {
    pub fn new(key: &[u8], e: f64, cfg: SessionConfig) -> Result<Self> {
        check_key(key, &cfg)?;
        Ok(Self {
            p2s_rng: seed::rng(cfg.shared_seed, &[label("p2s")]),
            cfg,
            e,
            key: key.to_vec(),
            agreement: None,
            word: Vec::new(),
            rounds: 0,
        })
    }

    fn tally(&self) -> Tally<'_> {
        Tally {
            cfg: &self.cfg,
            e: self.e,
            rounds: self.rounds,
            iterations: 0,
        }
    }

    /// Punctured positions, if the session got past rate selection.
    pub fn plan(&self) -> Option<&PuncturePlan> {
        self.agreement.as_ref().map(|a| &a.plan)
    }
}

impl Party for Alice {
    fn role(&self) -> Role {
        Role::Alice
    }

    fn start(&mut self) -> Result<Step> {
        let agreement = match agree(self.e, &self.cfg)? {
            Ok(a) => a,
            Err(reason) => return Ok(Step::Finish(self.tally().failed(None, reason))),
        };
        let mut local = seed::rng(self.cfg.local_seed, &[label("puncture")]);
        self.word = puncture(&self.key, &agreement.plan, &mut local);
        let zs = agreement.set.syndromes(&self.word)?;
        self.agreement = Some(agreement);
        self.rounds = 1;
        Ok(Step::Send(Message::SyndromeBundle(zs)))
    }

    fn handle(&mut self, msg: Message) -> Result<Step> {
        let Some(agreement) = self.agreement.as_mut() else {
            return Err(Error::Protocol("Alice received a message before starting".into()));
        };
        match msg {
            Message::Verdict(true) => {
                let key = strip(&self.key, &agreement.plan);
                let agreement = agreement.clone();
                Ok(Step::Finish(self.tally().succeeded(&agreement, key)))
            }
            Message::Verdict(false) => match convert_p2s(&mut agreement.plan, self.cfg.delta, &mut self.p2s_rng) {
                Ok(moved) => {
                    self.rounds += 1;
                    let pairs = moved.iter().map(|&v| (v as u32, self.word[v])).collect();
                    Ok(Step::Send(Message::ShortenReveal(pairs)))
                }
                Err(rate_adapt::Error::Exhausted) => {
                    let reason = "decoding failed with no punctured bits left".to_string();
                    let agreement = agreement.clone();
                    let result = self.tally().failed(Some(&agreement), reason.clone());
                    Ok(Step::SendAndFinish(Message::Abort(reason), result))
                }
                Err(err) => Err(err.into()),
            },
            Message::Abort(reason) => {
                let agreement = agreement.clone();
                Ok(Step::Finish(self.tally().failed(Some(&agreement), format!("peer aborted: {reason}"))))
            }
            other => Err(Error::Protocol(format!("Alice cannot handle {:?}", other.kind()))),
        }
    }
}

type TraceFn = Box<dyn FnMut(usize, &decoder::IterationTrace) + Send>;

/// Bob: decodes his punctured key against Alice's syndromes.
pub struct Bob {
    cfg: SessionConfig,
    e: f64,
    agreement: Option<Agreement>,
    key: Vec<u8>,
    /// Word carried across rounds: the received key with local punctured
    /// fill, then the decoder output of each round with revealed bits applied.
    word: Vec<u8>,
    syndromes: Vec<Syndrome>,
    decoder_cfg: DecoderConfig,
    rounds: usize,
    iterations: usize,
    trace: Option<TraceFn>,
}

impl Bob {
    pub fn new(key: &[u8], e: f64, cfg: SessionConfig) -> Result<Self> {
        check_key(key, &cfg)?;
        let decoder_cfg = DecoderConfig::new(e, cfg.max_iters)?;
        Ok(Self {
            cfg,
            e,
            agreement: None,
            key: key.to_vec(),
            word: Vec::new(),
            syndromes: Vec::new(),
            decoder_cfg,
            rounds: 0,
            iterations: 0,
            trace: None,
        })
    }

    /// Installs a per-iteration observer, called with the round number.
    pub fn with_trace(mut self, f: impl FnMut(usize, &decoder::IterationTrace) + Send + 'static) -> Self {
        self.trace = Some(Box::new(f));
        self
    }

    fn tally(&self) -> Tally<'_> {
        Tally {
            cfg: &self.cfg,
            e: self.e,
            rounds: self.rounds,
            iterations: self.iterations,
        }
    }

    /// Current word estimate (punctured positions filled).
    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn plan(&self) -> Option<&PuncturePlan> {
        self.agreement.as_ref().map(|a| &a.plan)
    }

    fn decode(&mut self, initial_estimate: f64) -> Result<Step> {
        let agreement = self.agreement.as_ref().expect("decode runs after agreement");
        let set = &agreement.set;
        let mut dec: Box<dyn BpDecoder> = if set.len() == 1 {
            Box::new(SingleDecoder::init_from_set(&self.word, &agreement.plan, &self.decoder_cfg, set)?)
        } else {
            Box::new(DecoderState::init(&self.word, &agreement.plan, &self.decoder_cfg, set)?)
        };
        dec.set_error_estimate(initial_estimate);
        let round = self.rounds;
        let outcome = match self.trace.as_mut() {
            Some(t) => {
                let mut f = |it: &decoder::IterationTrace| t(round, it);
                decoder::decode_round(dec.as_mut(), set, &self.syndromes, &self.decoder_cfg, Some(&mut f))
            }
            None => decoder::decode_round(dec.as_mut(), set, &self.syndromes, &self.decoder_cfg, None),
        };
        self.iterations += dec.iterations();
        self.word = dec.word().to_vec();
        if outcome == RoundOutcome::Success && decoder::check_syndromes(&self.word, set, &self.syndromes) {
            let key = strip(&self.word, &agreement.plan);
            let result = self.tally().succeeded(agreement, key);
            return Ok(Step::SendAndFinish(Message::Verdict(true), result));
        }
        Ok(Step::Send(Message::Verdict(false)))
    }
}

impl Party for Bob {
    fn role(&self) -> Role {
        Role::Bob
    }

    fn start(&mut self) -> Result<Step> {
        let agreement = match agree(self.e, &self.cfg)? {
            Ok(a) => a,
            Err(reason) => return Ok(Step::Finish(self.tally().failed(None, reason))),
        };
        let mut local = seed::rng(self.cfg.local_seed, &[label("puncture")]);
        self.word = puncture(&self.key, &agreement.plan, &mut local);
        self.agreement = Some(agreement);
        Ok(Step::Wait)
    }

    fn handle(&mut self, msg: Message) -> Result<Step> {
        let Some(agreement) = self.agreement.as_mut() else {
            return Err(Error::Protocol("Bob received a message before starting".into()));
        };
        match msg {
            Message::SyndromeBundle(zs) => {
                if self.rounds != 0 {
                    return Err(Error::Protocol("second syndrome bundle".into()));
                }
                let set = &agreement.set;
                if zs.len() != set.len() || zs.iter().any(|z| z.len() != set.n_rows()) {
                    return Err(Error::Protocol(format!(
                        "expected {} syndromes of {} bits",
                        set.len(),
                        set.n_rows()
                    )));
                }
                self.syndromes = zs;
                self.rounds = 1;
                self.decode(self.e)
            }
            Message::ShortenReveal(pairs) => {
                if self.rounds == 0 {
                    return Err(Error::Protocol("reveal before syndromes".into()));
                }
                let positions: Vec<usize> = pairs.iter().map(|&(v, _)| v as usize).collect();
                let expected = rate_adapt::p2s_count(agreement.plan.p0, self.cfg.delta, agreement.plan.punctured.len());
                if positions.len() != expected {
                    return Err(Error::Protocol(format!("reveal of {} bits, expected {expected}", positions.len())));
                }
                agreement
                    .plan
                    .shorten(&positions)
                    .map_err(|e| Error::Protocol(format!("bad reveal: {e}")))?;
                for &(v, b) in &pairs {
                    self.word[v as usize] = b;
                }
                self.rounds += 1;
                let estimate = decoder::estimate_error_rate(&self.word, &agreement.set, &self.syndromes);
                self.decode(estimate)
            }
            Message::Abort(reason) => {
                let agreement = agreement.clone();
                Ok(Step::Finish(self.tally().failed(Some(&agreement), format!("peer aborted: {reason}"))))
            }
            other => Err(Error::Protocol(format!("Bob cannot handle {:?}", other.kind()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub from: Role,
    pub kind: MessageKind,
    #[serde(serialize_with = "ser_hex")]
    pub frame: Vec<u8>,
}

fn ser_hex<S: serde::Serializer>(b: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&hex::encode(b))
}

/// Every frame exchanged in a session, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Transcript(pub Vec<TranscriptEntry>);

impl Transcript {
    fn push(&mut self, from: Role, kind: MessageKind, frame: Vec<u8>) {
        self.0.push(TranscriptEntry { from, kind, frame });
    }

    /// One JSON object per frame.
    pub fn to_jsonl(&self) -> String {
        self.0
            .iter()
            .map(|e| serde_json::to_string(e).expect("transcript serializes") + "\n")
            .collect()
    }

    pub fn total_bytes(&self) -> usize {
        self.0.iter().map(|e| e.frame.len()).sum()
    }
}

/// Drives one party over a transport until it finishes.
pub fn run_party<P: Party + ?Sized, T: Transport + ?Sized>(
    party: &mut P,
    transport: &mut T,
) -> Result<(SessionResult, Transcript)> {
    let me = party.role();
    let mut transcript = Transcript::default();
    let mut step = party.start()?;
    loop {
        step = match step {
            Step::Finish(result) => return Ok((result, transcript)),
            Step::SendAndFinish(msg, result) => {
                let frame = msg.encode();
                transport.send_frame(&frame)?;
                transcript.push(me, msg.kind(), frame);
                return Ok((result, transcript));
            }
            Step::Send(msg) => {
                let frame = msg.encode();
                transport.send_frame(&frame)?;
                transcript.push(me, msg.kind(), frame);
                Step::Wait
            }
            Step::Wait => {
                let (msg, frame) = transport.recv_frame()?;
                transcript.push(me.peer(), msg.kind(), frame);
                party.handle(msg)?
            }
        };
    }
}

/// Runs both parties in the calling thread, passing every message through
/// the wire encoding. Returns Alice's result, Bob's result and the shared
/// transcript.
pub fn run_local(alice: &mut Alice, bob: &mut Bob) -> Result<(SessionResult, SessionResult, Transcript)> {
    let mut transcript = Transcript::default();
    let mut results: [Option<SessionResult>; 2] = [None, None];
    // pending[k] holds a frame addressed to party k (0 = Alice, 1 = Bob)
    let mut pending: [Option<Vec<u8>>; 2] = [None, None];

    let mut absorb = |k: usize, step: Step, pending: &mut [Option<Vec<u8>>; 2], results: &mut [Option<SessionResult>; 2]| {
        let from = if k == 0 { Role::Alice } else { Role::Bob };
        let (msg, done) = match step {
            Step::Send(m) => (Some(m), None),
            Step::SendAndFinish(m, r) => (Some(m), Some(r)),
            Step::Finish(r) => (None, Some(r)),
            Step::Wait => (None, None),
        };
        if let Some(m) = msg {
            let frame = m.encode();
            transcript.push(from, m.kind(), frame.clone());
            pending[1 - k] = Some(frame);
        }
        if let Some(r) = done {
            results[k] = Some(r);
        }
    };

    let a = alice.start()?;
    absorb(0, a, &mut pending, &mut results);
    let b = bob.start()?;
    absorb(1, b, &mut pending, &mut results);
    while results.iter().any(Option::is_none) {
        let Some(k) = (0..2).find(|&k| pending[k].is_some()) else {
            return Err(Error::Protocol("both parties are waiting".into()));
        };
        if results[k].is_some() {
            return Err(Error::Protocol("message sent to a finished party".into()));
        }
        let frame = pending[k].take().unwrap();
        let (msg, _) = Message::decode(&frame)?;
        let step = if k == 0 { alice.handle(msg)? } else { bob.handle(msg)? };
        absorb(k, step, &mut pending, &mut results);
    }
    let [a, b] = results;
    Ok((a.unwrap(), b.unwrap(), transcript))
}

/// Runs a full session with each party on its own thread, connected by an
/// in-process transport. Each party gets a role-specific local seed.
pub fn run_session(x: &[u8], y: &[u8], e: f64, cfg: &SessionConfig) -> Result<(SessionResult, SessionResult)> {
    let mut alice = Alice::new(x, e, cfg.for_role(Role::Alice))?;
    let mut bob = Bob::new(y, e, cfg.for_role(Role::Bob))?;
    let (mut ta, mut tb) = channel_pair();
    let (ra, rb) = std::thread::scope(|s| {
        let ha = s.spawn(|| run_party(&mut alice, &mut ta));
        let hb = s.spawn(|| run_party(&mut bob, &mut tb));
        (ha.join().expect("alice thread"), hb.join().expect("bob thread"))
    });
    Ok((ra?.0, rb?.0))
}
