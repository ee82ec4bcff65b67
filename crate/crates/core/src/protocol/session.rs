//! Alice and Bob as message-driven state machines, with an in-process
//! driver and a driver for any reliable byte stream.
//!
//! The quantum phase is simulated: both parties regenerate frame `i` of
//! the shared seed, Alice keeping `x` and Bob keeping `y`. Everything
//! after that crosses the classical channel as [`Message`]s.
//!
//! Flow: Bob sends one `MAP_BLOCKS` per frame. Once Alice has all of
//! them she decodes, selects and answers with `IDX_LIST`,
//! `PADDED_SYNDROME` and `HASH_TAG` (only `IDX_LIST`, empty, when nothing
//! is selected). Bob corrects and answers `ACCEPT` or `REJECT`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hash;
use super::select::{select_indices, SelectionPolicy};
use super::stage1::{alice_frame, bob_frame, simulate_quadratures, AliceConfig, ChannelSpec};
use super::stage2::{alice_stage2, bob_stage2, OtpPool, Stage2Config, Stage2Outcome, Stage2Plan};
use super::wire::{read_envelope, write_envelope, Message, MessageType, SyndromeMsg};
use crate::channel::{substream, Stream};
use crate::error::{Error, Result};
use crate::ldpc::construct::{irregular, HIGH_RATE_PROFILE};
use crate::ldpc::{BpConfig, CodeSpec, LdpcCode};
use crate::multidim::{NoiseModel, DEFAULT_DIMENSION};

/// Stage-1 channel as written in a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSetting {
    /// Noise chosen so that the stage-1 code runs at this `beta_l`.
    Efficiency(f64),
    SigmaZ2(f64),
    Noiseless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    pub session_id: u32,
    pub seed: u64,
    pub frames: usize,
    pub code: CodeSpec,
    pub channel: ChannelSetting,
    pub dimension: usize,
    pub noise_model: NoiseModel,
    pub selection: SelectionPolicy,
    /// Drop frames failing the parity check before ranking by `q`.
    pub prefilter_syndrome: bool,
    pub bp: BpConfig,
    pub stage2: Stage2Config,
    pub hash_bits: usize,
    /// Size of the simulated pre-shared key.
    pub key_pool_bits: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            session_id: 1,
            seed: 1,
            frames: 1000,
            code: CodeSpec::default(),
            channel: ChannelSetting::Efficiency(1.1),
            dimension: DEFAULT_DIMENSION,
            noise_model: NoiseModel::BlockNorms,
            selection: SelectionPolicy::ByAfr { afr: 0.01 },
            prefilter_syndrome: false,
            bp: BpConfig::with_max_iterations(25),
            stage2: Stage2Config::default(),
            hash_bits: 32,
            key_pool_bits: 1 << 20,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.frames > u32::MAX as usize {
            return Err(Error::Config("frames must lie in [1, 2^32)".into()));
        }
        if self.hash_bits == 0 {
            return Err(Error::Config("hash_bits must be >= 1".into()));
        }
        self.selection.validate()?;
        self.stage2.validate()?;
        Ok(())
    }

    pub fn channel_spec(&self, rate: f64) -> Result<ChannelSpec> {
        let base = match self.channel {
            ChannelSetting::Efficiency(beta) => ChannelSpec::for_efficiency(rate, beta)?,
            ChannelSetting::SigmaZ2(s) => ChannelSpec {
                sigma_z2: s,
                ..ChannelSpec::noiseless()
            },
            ChannelSetting::Noiseless => ChannelSpec::noiseless(),
        };
        let spec = ChannelSpec {
            dimension: self.dimension,
            noise_model: self.noise_model,
            ..base
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds the stage-1 code and channel.
    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let code = self.code.build()?;
        self.prepare_with(Arc::new(code))
    }

    /// [`SessionConfig::prepare`] with an already built stage-1 code.
    pub fn prepare_with(&self, code: Arc<LdpcCode>) -> Result<Prepared> {
        self.validate()?;
        if !code.n().is_multiple_of(self.dimension) {
            return Err(Error::Config(format!(
                "code length {} is not a multiple of dimension {}",
                code.n(),
                self.dimension
            )));
        }
        let channel = self.channel_spec(code.rate())?;
        Ok(Prepared {
            cfg: self.clone(),
            code,
            channel,
        })
    }
}

/// A validated config with its stage-1 code.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cfg: SessionConfig,
    pub code: Arc<LdpcCode>,
    pub channel: ChannelSpec,
}

impl Prepared {
    fn alice_config(&self) -> AliceConfig {
        AliceConfig {
            sigma_z2: self.channel.sigma_z2,
            noise_model: self.channel.noise_model,
            bp: self.cfg.bp,
        }
    }

    fn key_pool(&self) -> OtpPool {
        OtpPool::from_seed(self.cfg.seed, self.cfg.key_pool_bits)
    }

    fn hash_seed(&self) -> u64 {
        self.cfg.seed ^ ((self.cfg.session_id as u64) << 32)
    }
}

/// How a session ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Delivered,
    NoFramesSelected,
    Stage2Failed,
    HashMismatch,
    /// Alice's side of a REJECT, which does not say why.
    Rejected,
    Failed { stage: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Stage1,
    Selection,
    Stage2,
    Verification,
    Done,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Stage1 => "stage1",
            Phase::Selection => "selection",
            Phase::Stage2 => "stage2",
            Phase::Verification => "verification",
            Phase::Done => "done",
        }
    }
}

/// Per-frame decision kept by Alice.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedFrame {
    pub s_hat: Vec<u8>,
    pub q: f64,
    pub syndrome_ok: bool,
    pub degenerate: bool,
}

/// Alice: decodes, selects and sends the padded syndrome.
pub struct Alice {
    ctx: Prepared,
    pool: OtpPool,
    maps: BTreeMap<u32, crate::multidim::MappedBlock>,
    decoded: Vec<DecodedFrame>,
    selected: Vec<u32>,
    c_h: Vec<u8>,
    plan: Option<Stage2Plan>,
    key_consumed: usize,
    phase: Phase,
    outcome: Option<Outcome>,
}

impl Alice {
    pub fn new(ctx: Prepared) -> Self {
        let pool = ctx.key_pool();
        Alice {
            ctx,
            pool,
            maps: BTreeMap::new(),
            decoded: Vec::new(),
            selected: Vec::new(),
            c_h: Vec::new(),
            plan: None,
            key_consumed: 0,
            phase: Phase::Stage1,
            outcome: None,
        }
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    pub fn decoded(&self) -> &[DecodedFrame] {
        &self.decoded
    }

    pub fn selected(&self) -> &[u32] {
        &self.selected
    }

    /// `c_h`: the concatenated accepted information bits.
    pub fn payload(&self) -> &[u8] {
        &self.c_h
    }

    pub fn handle(&mut self, msg: Message) -> Result<Vec<Message>> {
        match (self.phase, msg) {
            (Phase::Stage1, Message::MapBlocks { frame, mapped }) => {
                if frame as usize >= self.ctx.cfg.frames {
                    return Err(Error::Wire(format!("frame {frame} out of range")));
                }
                if self.maps.insert(frame, mapped).is_some() {
                    return Err(Error::Wire(format!("frame {frame} sent twice")));
                }
                if self.maps.len() < self.ctx.cfg.frames {
                    return Ok(Vec::new());
                }
                self.decode_all()?;
                self.phase = Phase::Selection;
                self.select_and_send()
            }
            (Phase::Verification, Message::Accept) => {
                self.finish(Outcome::Delivered);
                Ok(Vec::new())
            }
            (Phase::Verification, Message::Reject) => {
                self.finish(Outcome::Rejected);
                Ok(Vec::new())
            }
            (phase, msg) => Err(Error::Wire(format!(
                "Alice cannot handle {} during {}",
                msg.kind().name(),
                phase.name()
            ))),
        }
    }

    fn decode_all(&mut self) -> Result<()> {
        let ctx = &self.ctx;
        let cfg = ctx.alice_config();
        let maps: Vec<(&u32, &crate::multidim::MappedBlock)> = self.maps.iter().collect();
        self.decoded = maps
            .par_iter()
            .map(|(&i, mapped)| {
                let x = simulate_quadratures(&ctx.channel, ctx.code.n(), ctx.cfg.seed, i as u64).x;
                match alice_frame(&ctx.code, &x, mapped, i as u64, &cfg) {
                    Ok(rec) => Ok(DecodedFrame {
                        s_hat: rec.decode.s_hat,
                        q: rec.q,
                        syndrome_ok: rec.decode.syndrome_ok,
                        degenerate: false,
                    }),
                    Err(Error::DegenerateBlock { .. }) => Ok(DecodedFrame {
                        s_hat: vec![0; ctx.code.k()],
                        q: f64::NEG_INFINITY,
                        syndrome_ok: false,
                        degenerate: true,
                    }),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        self.maps.clear();
        Ok(())
    }

    fn select_and_send(&mut self) -> Result<Vec<Message>> {
        let cfg = &self.ctx.cfg;
        let q: Vec<f64> = self.decoded.iter().map(|d| d.q).collect();
        let eligible: Vec<bool> = self
            .decoded
            .iter()
            .map(|d| !d.degenerate && (!cfg.prefilter_syndrome || d.syndrome_ok))
            .collect();
        let idx = select_indices(&q, Some(&eligible), &cfg.selection)?;
        self.selected = idx.iter().map(|&i| i as u32).collect();
        if idx.is_empty() {
            self.finish(Outcome::NoFramesSelected);
            return Ok(vec![Message::IdxList(Vec::new())]);
        }
        self.phase = Phase::Stage2;
        self.c_h = idx.iter().flat_map(|&i| self.decoded[i].s_hat.iter().copied()).collect();
        let plan = Stage2Plan::new(self.c_h.len(), &cfg.stage2)?;
        let code_h = plan.build_code(cfg.stage2.code_seed)?;
        let (sent, used) = alice_stage2(&self.c_h, &code_h, &mut self.pool, cfg.session_id)?;
        self.key_consumed = used;
        self.plan = Some(plan);
        let tag = hash::tag(&self.c_h, cfg.hash_bits, self.ctx.hash_seed())?;
        self.phase = Phase::Verification;
        Ok(vec![
            Message::IdxList(self.selected.clone()),
            Message::PaddedSyndrome(SyndromeMsg {
                payload_len: plan.payload_len as u32,
                n_h: plan.n_h as u32,
                m_h: plan.m_h as u32,
                code_seed: cfg.stage2.code_seed,
                crossover_p: cfg.stage2.crossover_p,
                bits: sent,
            }),
            Message::HashTag(tag.bits),
        ])
    }

    fn finish(&mut self, outcome: Outcome) {
        self.outcome = Some(outcome);
        self.phase = Phase::Done;
    }

    pub fn fail(&mut self, err: &Error) {
        let stage = self.phase.name().to_string();
        self.finish(Outcome::Failed {
            stage,
            message: err.to_string(),
        });
    }

    pub fn report(&self) -> PartyReport {
        let outcome = self.outcome.clone().unwrap_or(Outcome::Failed {
            stage: self.phase.name().into(),
            message: "session incomplete".into(),
        });
        let delivered: &[u8] = if outcome == Outcome::Delivered { &self.c_h } else { &[] };
        PartyReport {
            role: "alice".into(),
            session_id: self.ctx.cfg.session_id,
            frames: self.ctx.cfg.frames,
            degenerate_frames: self.decoded.iter().filter(|d| d.degenerate).count(),
            accepted: self.selected.len(),
            payload_bits: self.c_h.len(),
            n_h: self.plan.map(|p| p.n_h),
            m_h: self.plan.map(|p| p.m_h),
            key_consumed: self.key_consumed,
            bits_delivered: delivered.len(),
            stage2_converged: None,
            stage2_iterations: None,
            delivered_digest: digest(delivered),
            outcome,
            sent_bytes: BTreeMap::new(),
            received_bytes: BTreeMap::new(),
        }
    }
}

/// Bob: encodes, maps and corrects toward Alice's string.
pub struct Bob {
    ctx: Prepared,
    pool: OtpPool,
    s: Vec<Vec<u8>>,
    own_bits: Vec<u8>,
    selected: Vec<u32>,
    stage2: Option<Stage2Outcome>,
    plan: Option<Stage2Plan>,
    key_consumed: usize,
    phase: Phase,
    outcome: Option<Outcome>,
}

impl Bob {
    pub fn new(ctx: Prepared) -> Self {
        let pool = ctx.key_pool();
        Bob {
            ctx,
            pool,
            s: Vec::new(),
            own_bits: Vec::new(),
            selected: Vec::new(),
            stage2: None,
            plan: None,
            key_consumed: 0,
            phase: Phase::Stage1,
            outcome: None,
        }
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    /// Bob's information bits per frame.
    pub fn info_bits(&self) -> &[Vec<u8>] {
        &self.s
    }

    pub fn own_bits(&self) -> &[u8] {
        &self.own_bits
    }

    pub fn corrected(&self) -> Option<&[u8]> {
        self.stage2.as_ref().map(|o| o.c_hat.as_slice())
    }

    /// Encodes and maps every frame.
    pub fn start(&mut self) -> Result<Vec<Message>> {
        let ctx = &self.ctx;
        let frames: Vec<_> = (0..ctx.cfg.frames as u64)
            .into_par_iter()
            .map(|i| {
                let y = simulate_quadratures(&ctx.channel, ctx.code.n(), ctx.cfg.seed, i).y;
                bob_frame(&ctx.code, &y, ctx.channel.dimension, ctx.cfg.seed, i)
            })
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(frames.len());
        for f in frames {
            self.s.push(f.s);
            out.push(Message::MapBlocks {
                frame: f.index as u32,
                mapped: f.mapped,
            });
        }
        self.phase = Phase::Selection;
        Ok(out)
    }

    pub fn handle(&mut self, msg: Message) -> Result<Vec<Message>> {
        match (self.phase, msg) {
            (Phase::Selection, Message::IdxList(idx)) => {
                if idx.windows(2).any(|w| w[0] >= w[1]) || idx.last().is_some_and(|&i| i as usize >= self.s.len()) {
                    return Err(Error::Wire("IDX_LIST must be ascending frame indices".into()));
                }
                self.selected = idx;
                if self.selected.is_empty() {
                    self.finish(Outcome::NoFramesSelected);
                } else {
                    self.own_bits = self.selected.iter().flat_map(|&i| self.s[i as usize].iter().copied()).collect();
                    self.phase = Phase::Stage2;
                }
                Ok(Vec::new())
            }
            (Phase::Stage2, Message::PaddedSyndrome(msg)) => {
                if msg.payload_len as usize != self.own_bits.len() {
                    return Err(Error::Wire(format!(
                        "syndrome covers {} bits, Bob holds {}",
                        msg.payload_len,
                        self.own_bits.len()
                    )));
                }
                let code_h = irregular(msg.n_h as usize, msg.m_h as usize, &HIGH_RATE_PROFILE, msg.code_seed)?;
                let out = bob_stage2(
                    &self.own_bits,
                    &msg.bits,
                    &mut self.pool,
                    self.ctx.cfg.session_id,
                    &code_h,
                    msg.crossover_p,
                    &self.ctx.cfg.stage2.bp,
                )?;
                self.key_consumed = code_h.m();
                self.plan = Some(Stage2Plan {
                    payload_len: msg.payload_len as usize,
                    n_h: msg.n_h as usize,
                    m_h: msg.m_h as usize,
                });
                self.stage2 = Some(out);
                self.phase = Phase::Verification;
                Ok(Vec::new())
            }
            (Phase::Verification, Message::HashTag(bits)) => {
                let out = self.stage2.as_ref().expect("stage 2 ran");
                if !out.converged {
                    self.finish(Outcome::Stage2Failed);
                    return Ok(vec![Message::Reject]);
                }
                let mine = hash::tag(&out.c_hat, bits.len(), self.ctx.hash_seed())?;
                if mine.bits == bits {
                    self.finish(Outcome::Delivered);
                    Ok(vec![Message::Accept])
                } else {
                    self.finish(Outcome::HashMismatch);
                    Ok(vec![Message::Reject])
                }
            }
            (phase, msg) => Err(Error::Wire(format!(
                "Bob cannot handle {} during {}",
                msg.kind().name(),
                phase.name()
            ))),
        }
    }

    fn finish(&mut self, outcome: Outcome) {
        self.outcome = Some(outcome);
        self.phase = Phase::Done;
    }

    pub fn fail(&mut self, err: &Error) {
        let stage = self.phase.name().to_string();
        self.finish(Outcome::Failed {
            stage,
            message: err.to_string(),
        });
    }

    pub fn report(&self) -> PartyReport {
        let outcome = self.outcome.clone().unwrap_or(Outcome::Failed {
            stage: self.phase.name().into(),
            message: "session incomplete".into(),
        });
        let delivered: &[u8] = match (&outcome, &self.stage2) {
            (Outcome::Delivered, Some(o)) => &o.c_hat,
            _ => &[],
        };
        PartyReport {
            role: "bob".into(),
            session_id: self.ctx.cfg.session_id,
            frames: self.ctx.cfg.frames,
            degenerate_frames: 0,
            accepted: self.selected.len(),
            payload_bits: self.own_bits.len(),
            n_h: self.plan.map(|p| p.n_h),
            m_h: self.plan.map(|p| p.m_h),
            key_consumed: self.key_consumed,
            bits_delivered: delivered.len(),
            stage2_converged: self.stage2.as_ref().map(|o| o.converged),
            stage2_iterations: self.stage2.as_ref().map(|o| o.iterations),
            delivered_digest: digest(delivered),
            outcome,
            sent_bytes: BTreeMap::new(),
            received_bytes: BTreeMap::new(),
        }
    }
}

/// 64-bit FNV-1a of the packed bits, for comparing delivered strings
/// across processes. Not a security primitive.
pub fn digest(bits: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in super::wire::pack_bits(bits).iter().chain(&(bits.len() as u64).to_le_bytes()) {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// One party's view of a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartyReport {
    pub role: String,
    pub session_id: u32,
    pub frames: usize,
    pub degenerate_frames: usize,
    pub accepted: usize,
    pub payload_bits: usize,
    pub n_h: Option<usize>,
    pub m_h: Option<usize>,
    pub key_consumed: usize,
    pub bits_delivered: usize,
    pub stage2_converged: Option<bool>,
    pub stage2_iterations: Option<usize>,
    pub delivered_digest: String,
    pub outcome: Outcome,
    pub sent_bytes: BTreeMap<String, usize>,
    pub received_bytes: BTreeMap<String, usize>,
}

/// Both parties' views plus simulation ground truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub session_id: u32,
    pub frames: usize,
    pub degenerate_frames: usize,
    pub syndrome_failures: usize,
    pub accepted: usize,
    pub afr_realized: f64,
    /// Smallest accepted `q`.
    pub q_c: Option<f64>,
    /// Information-bit error rate of Alice's decisions in accepted frames.
    pub ber_af_realized: Option<f64>,
    pub payload_bits: usize,
    pub n_h: Option<usize>,
    pub m_h: Option<usize>,
    pub stage2_converged: Option<bool>,
    pub stage2_iterations: Option<usize>,
    /// Bob's disagreements with `c_h` after correction.
    pub residual_errors: Option<usize>,
    pub key_consumed: usize,
    pub bits_delivered: usize,
    /// Both parties delivered the same, non-empty string.
    pub strings_equal: bool,
    pub outcome: Outcome,
    /// Classical-channel bytes by message type, both directions.
    pub transcript_bytes: BTreeMap<String, usize>,
}

fn count(map: &mut BTreeMap<String, usize>, kind: MessageType, bytes: usize) {
    *map.entry(kind.name().to_string()).or_default() += bytes;
}

/// Runs a whole session in one process. `shuffle` permutes the order in
/// which `MAP_BLOCKS` reach Alice.
pub fn run_prepared(ctx: &Prepared, shuffle: Option<u64>) -> SessionReport {
    let mut alice = Alice::new(ctx.clone());
    let mut bob = Bob::new(ctx.clone());
    let mut transcript = BTreeMap::new();
    let sid = ctx.cfg.session_id;

    let result: Result<()> = (|| {
        let mut to_alice = bob.start()?;
        if let Some(s) = shuffle {
            to_alice.shuffle(&mut substream(s, Stream::Analysis, 7));
        }
        loop {
            let mut to_bob = Vec::new();
            for m in to_alice.drain(..) {
                count(&mut transcript, m.kind(), m.to_envelope(sid).wire_len());
                to_bob.extend(alice.handle(m).inspect_err(|e| alice.fail(e))?);
            }
            for m in to_bob {
                count(&mut transcript, m.kind(), m.to_envelope(sid).wire_len());
                to_alice.extend(bob.handle(m).inspect_err(|e| bob.fail(e))?);
            }
            if to_alice.is_empty() {
                return Ok(());
            }
        }
    })();
    if let Err(e) = &result {
        if !bob.is_done() {
            bob.fail(e);
        }
        if !alice.is_done() {
            alice.fail(e);
        }
    }
    summarize(&alice, &bob, transcript)
}

fn summarize(alice: &Alice, bob: &Bob, transcript_bytes: BTreeMap<String, usize>) -> SessionReport {
    let (ra, rb) = (alice.report(), bob.report());
    let frames = ra.frames;
    let k = alice.ctx.code.k();
    let truth_errors = || -> usize {
        alice
            .selected()
            .iter()
            .map(|&i| {
                let (a, b) = (&alice.decoded()[i as usize].s_hat, &bob.info_bits()[i as usize]);
                a.iter().zip(b).filter(|(x, y)| x != y).count()
            })
            .sum()
    };
    let accepted = ra.accepted;
    let ber_af_realized = (accepted > 0 && !alice.decoded().is_empty())
        .then(|| truth_errors() as f64 / (accepted * k) as f64);
    let q_c = alice
        .selected()
        .iter()
        .map(|&i| alice.decoded()[i as usize].q)
        .min_by(f64::total_cmp);
    let residual_errors = bob
        .corrected()
        .map(|c| c.iter().zip(alice.payload()).filter(|(a, b)| a != b).count());
    // Alice's view can lag (e.g. she never saw the verdict); Bob's is final
    let outcome = match (&ra.outcome, &rb.outcome) {
        (Outcome::Failed { .. }, _) => ra.outcome.clone(),
        (_, o) => o.clone(),
    };
    let strings_equal = ra.bits_delivered > 0 && ra.delivered_digest == rb.delivered_digest && {
        let c = bob.corrected().unwrap_or_default();
        c == alice.payload()
    };
    SessionReport {
        session_id: ra.session_id,
        frames,
        degenerate_frames: ra.degenerate_frames,
        syndrome_failures: alice.decoded().iter().filter(|d| !d.syndrome_ok).count(),
        accepted,
        afr_realized: accepted as f64 / frames as f64,
        q_c,
        ber_af_realized,
        payload_bits: ra.payload_bits,
        n_h: ra.n_h,
        m_h: ra.m_h,
        stage2_converged: rb.stage2_converged,
        stage2_iterations: rb.stage2_iterations,
        residual_errors,
        key_consumed: ra.key_consumed,
        bits_delivered: if outcome == Outcome::Delivered { ra.bits_delivered } else { 0 },
        strings_equal,
        outcome,
        transcript_bytes,
    }
}

/// Builds everything from `cfg` and runs in process.
pub fn run_session(cfg: &SessionConfig) -> Result<SessionReport> {
    Ok(run_prepared(&cfg.prepare()?, None))
}

/// Which side of a two-party session this process plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Alice,
    Bob,
}

fn send<S: Write>(stream: &mut S, sid: u32, msgs: Vec<Message>, sent: &mut BTreeMap<String, usize>) -> Result<()> {
    for m in msgs {
        let env = m.to_envelope(sid);
        count(sent, env.kind, env.wire_len());
        write_envelope(stream, &env)?;
    }
    Ok(())
}

fn recv<S: Read>(stream: &mut S, sid: u32, received: &mut BTreeMap<String, usize>) -> Result<Message> {
    let env = read_envelope(stream)?;
    if env.session != sid {
        return Err(Error::Wire(format!("session id {} != {sid}", env.session)));
    }
    count(received, env.kind, env.wire_len());
    Message::from_envelope(&env)
}

/// Plays `role` over a connected stream until the session ends.
pub fn run_party<S: Read + Write>(stream: &mut S, ctx: &Prepared, role: Role) -> Result<PartyReport> {
    let sid = ctx.cfg.session_id;
    let (mut sent, mut received) = (BTreeMap::new(), BTreeMap::new());
    let mut report = match role {
        Role::Alice => {
            let mut alice = Alice::new(ctx.clone());
            while !alice.is_done() {
                let msg = recv(stream, sid, &mut received)?;
                let out = alice.handle(msg)?;
                send(stream, sid, out, &mut sent)?;
            }
            alice.report()
        }
        Role::Bob => {
            let mut bob = Bob::new(ctx.clone());
            let first = bob.start()?;
            send(stream, sid, first, &mut sent)?;
            while !bob.is_done() {
                let msg = recv(stream, sid, &mut received)?;
                let out = bob.handle(msg)?;
                send(stream, sid, out, &mut sent)?;
            }
            bob.report()
        }
    };
    report.sent_bytes = sent;
    report.received_bytes = received;
    Ok(report)
}
