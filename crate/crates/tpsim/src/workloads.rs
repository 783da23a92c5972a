//! Deterministic guest programs and generators for the channel scenarios.
//!
//! Program source is line oriented: one instruction per line, `#` starts a
//! comment, numeric literals are decimal or `0x` hex.
//!
//! ```text
//! # touch a line, then report the measured latency
//! LOAD 0x1000
//! OBSERVE probe
//! HALT
//! ```

use std::fmt;

use crate::error::SimError;
use crate::timemodel::Cycles;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Load(u64),
    Store(u64),
    Compute(Cycles),
    Observe(String),
    /// Resolves at run time to `Load(base + secret * stride)`.
    SecretLoad { base: u64, stride: u64 },
    Syscall,
    Halt,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Load(a) => write!(f, "LOAD {a:#x}"),
            Instruction::Store(a) => write!(f, "STORE {a:#x}"),
            Instruction::Compute(n) => write!(f, "COMPUTE {n}"),
            Instruction::Observe(l) => write!(f, "OBSERVE {l}"),
            Instruction::SecretLoad { base, stride } => {
                write!(f, "SECRET_LOAD {base:#x} {stride}")
            }
            Instruction::Syscall => write!(f, "SYSCALL"),
            Instruction::Halt => write!(f, "HALT"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub instructions: Vec<Instruction>,
}

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Self {
        Program { instructions }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Largest data address the program can touch when run with any secret
    /// of the given width. Used for bounds validation.
    pub fn max_data_addr(&self, secret_width: u32) -> Option<u64> {
        let max_secret = if secret_width == 0 {
            0
        } else {
            (1u64 << secret_width) - 1
        };
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Load(a) | Instruction::Store(a) => Some(*a),
                Instruction::SecretLoad { base, stride } => Some(base + max_secret * stride),
                _ => None,
            })
            .max()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.instructions {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}

fn parse_num(tok: &str, line: usize) -> Result<u64, SimError> {
    let parsed = if let Some(hex) = tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        tok.parse()
    };
    parsed.map_err(|_| SimError::Parse {
        line,
        msg: format!("bad numeric literal `{tok}`"),
    })
}

/// Assemble program source text. Errors carry the 1-based source line.
pub fn assemble(src: &str) -> Result<Program, SimError> {
    let mut instructions = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut toks = text.split_whitespace();
        let mnemonic = toks.next().unwrap();
        let operands: Vec<&str> = toks.collect();
        let expect = |n: usize| -> Result<(), SimError> {
            if operands.len() != n {
                Err(SimError::Parse {
                    line,
                    msg: format!(
                        "{mnemonic} takes {n} operand(s), found {}",
                        operands.len()
                    ),
                })
            } else {
                Ok(())
            }
        };
        let instr = match mnemonic {
            "LOAD" => {
                expect(1)?;
                Instruction::Load(parse_num(operands[0], line)?)
            }
            "STORE" => {
                expect(1)?;
                Instruction::Store(parse_num(operands[0], line)?)
            }
            "COMPUTE" => {
                expect(1)?;
                Instruction::Compute(parse_num(operands[0], line)?)
            }
            "OBSERVE" => {
                expect(1)?;
                Instruction::Observe(operands[0].to_string())
            }
            "SECRET_LOAD" => {
                expect(2)?;
                Instruction::SecretLoad {
                    base: parse_num(operands[0], line)?,
                    stride: parse_num(operands[1], line)?,
                }
            }
            "SYSCALL" => {
                expect(0)?;
                Instruction::Syscall
            }
            "HALT" => {
                expect(0)?;
                Instruction::Halt
            }
            other => {
                return Err(SimError::Parse {
                    line,
                    msg: format!("unknown mnemonic `{other}`"),
                })
            }
        };
        instructions.push(instr);
    }
    Ok(Program::new(instructions))
}

/// A secret value of a fixed bit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Secret {
    value: u64,
    width: u32,
}

impl Secret {
    pub fn new(value: u64, width: u32) -> Result<Self, SimError> {
        if width > 63 {
            return Err(SimError::Config(format!("secret width {width} too large")));
        }
        if width < 64 && value >= 1u64 << width {
            return Err(SimError::Config(format!(
                "secret {value} does not fit in {width} bits"
            )));
        }
        Ok(Secret { value, width })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bit(&self, i: u32) -> bool {
        (self.value >> i) & 1 == 1
    }

    /// All secrets of a width, in increasing order.
    pub fn exhaustive(width: u32) -> impl Iterator<Item = Secret> {
        let count = 1u64 << width;
        (0..count).map(move |v| Secret { value: v, width })
    }
}

/// Per-set probe measurements: the worst latency the prober saw for each
/// probed set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProbeResult {
    pub latency_by_set: std::collections::BTreeMap<usize, Cycles>,
}

impl ProbeResult {
    pub fn record(&mut self, set: usize, latency: Cycles) {
        let slot = self.latency_by_set.entry(set).or_insert(0);
        *slot = (*slot).max(latency);
    }
}

/// One secret bit's worth of cache sets, with concrete addresses for both
/// sides: the prober needs `ways` distinct lines per set, the signaller one
/// or more lines directed at the same sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeGroup {
    /// Cache sets carrying this bit.
    pub sets: Vec<usize>,
    /// Prober virtual addresses, `ways` per set, covering the group.
    pub spy_lines: Vec<u64>,
    /// Signaller virtual addresses aimed at the same sets.
    pub trojan_lines: Vec<u64>,
}

/// Address plan for a prime-and-probe pair, derived from the actual frame
/// allocation of the machine under test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbePlan {
    pub groups: Vec<ProbeGroup>,
    /// Pacing block inserted between phases so that prime, signal and probe
    /// run in consecutive slices of their domains.
    pub pace: Cycles,
}

/// Observe label used by probe-phase accesses: `p:<group>:<way>`.
pub fn probe_label(group: usize, way: usize) -> String {
    format!("p:{group}:{way}")
}

pub fn parse_probe_label(label: &str) -> Option<(usize, usize)> {
    let mut parts = label.split(':');
    if parts.next()? != "p" {
        return None;
    }
    let g = parts.next()?.parse().ok()?;
    let w = parts.next()?.parse().ok()?;
    Some((g, w))
}

/// Build the trojan/spy pair for a prime-and-probe attack.
///
/// The spy primes every (set, way) of the plan, waits out one slice, then
/// re-traverses the buffer recording a latency per access. The trojan
/// touches group `i` exactly when bit `i` of the secret is set.
pub fn gen_prime_probe(
    secret: &Secret,
    plan: &ProbePlan,
) -> Result<(Program, Program), SimError> {
    if secret.width() as usize > plan.groups.len() {
        return Err(SimError::Config(format!(
            "secret width {} exceeds the {} probe groups available",
            secret.width(),
            plan.groups.len()
        )));
    }

    let mut spy = Vec::new();
    for group in &plan.groups {
        for &addr in &group.spy_lines {
            spy.push(Instruction::Load(addr));
        }
    }
    spy.push(Instruction::Compute(plan.pace));
    for (g, group) in plan.groups.iter().enumerate() {
        for (w, &addr) in group.spy_lines.iter().enumerate() {
            spy.push(Instruction::Load(addr));
            spy.push(Instruction::Observe(probe_label(g, w)));
        }
    }
    spy.push(Instruction::Halt);

    let mut trojan = Vec::new();
    for (g, group) in plan.groups.iter().enumerate() {
        if (g as u32) < secret.width() && secret.bit(g as u32) {
            for &addr in &group.trojan_lines {
                trojan.push(Instruction::Load(addr));
            }
        }
    }
    trojan.push(Instruction::Halt);

    Ok((Program::new(trojan), Program::new(spy)))
}

/// Recover a secret from probe measurements: bit `i` is set when any probed
/// access in group `i` exceeded the threshold. The threshold must sit
/// strictly between the configured hit and miss latencies of the probed
/// cache level.
pub fn decode_probe(
    result: &ProbeResult,
    groups: &[ProbeGroup],
    threshold: Cycles,
) -> Result<Secret, SimError> {
    let mut value = 0u64;
    for (g, group) in groups.iter().enumerate() {
        let slow = group.sets.iter().any(|s| {
            result
                .latency_by_set
                .get(s)
                .is_some_and(|&lat| lat > threshold)
        });
        if slow {
            value |= 1 << g;
        }
    }
    Secret::new(value, groups.len() as u32)
}

/// Addresses the flush-latency trojan may dirty: distinct L1D lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlushChannelPlan {
    pub store_lines: Vec<u64>,
}

/// Trojan dirties `secret` distinct lines then halts; the observer's first
/// instruction records its own start-of-slice timestamp, which with padding
/// disabled reveals how long the flush took.
pub fn gen_flush_latency_channel(
    secret: &Secret,
    plan: &FlushChannelPlan,
) -> Result<(Program, Program), SimError> {
    let k = secret.value() as usize;
    if k > plan.store_lines.len() {
        return Err(SimError::Config(format!(
            "secret {k} exceeds the {} dirtiable lines",
            plan.store_lines.len()
        )));
    }
    let mut trojan = Vec::new();
    for &addr in &plan.store_lines[..k] {
        trojan.push(Instruction::Store(addr));
    }
    trojan.push(Instruction::Halt);

    let observer = vec![Instruction::Observe("t0".into()), Instruction::Halt];
    Ok((Program::new(trojan), Program::new(observer)))
}

/// Plan for the shared-kernel-image channel: for each kernel data set the
/// signaller owns enough same-set lines to evict it from the LLC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelEvictPlan {
    /// Outer: one entry per kernel data line; inner: signaller addresses
    /// mapping to that line's LLC set (one per way).
    pub evict_lines: Vec<Vec<u64>>,
    pub rounds: u32,
    pub pace: Cycles,
}

/// One bit per round: in round `k` the signaller either evicts every kernel
/// syscall data line from the LLC (bit set) or stays quiet. The receiver
/// performs one syscall per round; its duration reads the bit back.
pub fn gen_syscall_channel(
    secret: &Secret,
    plan: &KernelEvictPlan,
) -> Result<(Program, Program), SimError> {
    if secret.width() > plan.rounds {
        return Err(SimError::Config(format!(
            "secret width {} exceeds {} rounds",
            secret.width(),
            plan.rounds
        )));
    }
    let mut hi = Vec::new();
    for k in 0..plan.rounds {
        if k < secret.width() && secret.bit(k) {
            for lines in &plan.evict_lines {
                for &addr in lines {
                    hi.push(Instruction::Load(addr));
                }
            }
        }
        hi.push(Instruction::Compute(plan.pace));
    }
    hi.push(Instruction::Halt);

    let mut lo = vec![
        Instruction::Syscall,
        Instruction::Observe("warm".into()),
        Instruction::Compute(plan.pace),
    ];
    for k in 0..plan.rounds {
        lo.push(Instruction::Syscall);
        lo.push(Instruction::Observe(format!("sc:{k}")));
        lo.push(Instruction::Compute(plan.pace));
    }
    lo.push(Instruction::Halt);

    Ok((Program::new(hi), Program::new(lo)))
}

/// Worst-case duration of the downgrader switch path: the secret-dependent
/// work itself plus a clean flush and the scheduler's fixed data touches.
pub fn downgrader_min_pad(width: u32, params: &crate::timemodel::TimeModelParams) -> Cycles {
    let max_work = if width == 0 { 0 } else { (1u64 << width) - 1 };
    max_work + params.flush_base + 4 * params.mem
}

/// A trusted component whose compute time depends on the secret, released
/// to the next domain at a padded, secret-independent deadline. Rejects pad
/// values that some secret is guaranteed to overrun.
pub fn gen_downgrader(
    secret: &Secret,
    pad: Cycles,
    min_pad: Cycles,
) -> Result<Program, SimError> {
    if pad < min_pad {
        return Err(SimError::Config(format!(
            "downgrader pad {pad} below worst-case work {min_pad}"
        )));
    }
    Ok(Program::new(vec![
        Instruction::Compute(secret.value()),
        Instruction::Halt,
    ]))
}
