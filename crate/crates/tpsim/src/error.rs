//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Program source could not be assembled.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Scenario file is not well-formed.
    #[error("scenario parse error: {0}")]
    Scenario(String),

    /// Scenario is well-formed but inconsistent.
    #[error("validation error: {0}")]
    Validation(String),

    /// A generator or experiment was configured with impossible parameters.
    #[error("config error: {0}")]
    Config(String),

    /// The frame allocator ran out of frames for the requested colours.
    #[error("no free frame for colours {colours:?}")]
    ColourExhausted { colours: Vec<usize> },

    #[error("colour {colour} out of range, geometry has {num_colours} colours")]
    ColourOutOfRange { colour: usize, num_colours: usize },

    #[error("irq {0} is not owned by any domain")]
    UnknownIrq(u32),

    /// Switch work ran past the padded deadline. Hard error: silently
    /// extending the pad would itself open a channel.
    #[error(
        "pad overrun: domain {domain} switch work finished at cycle {finished}, \
         padded deadline was {deadline}"
    )]
    PadOverrun {
        domain: usize,
        finished: u64,
        deadline: u64,
    },

    #[error("domain {domain} touched unmapped address {vaddr:#x}")]
    UnmappedAddress { domain: usize, vaddr: u64 },

    #[error("step budget of {0} exhausted before all programs halted")]
    StepBudget(u64),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
