//! Engine parameters and the `name = value` parameter file format.

use alloc::string::{String, ToString};

use thiserror::Error;

/// Full parameter set for a run. Defaults are the published reference
/// configuration; see [`ParameterSet::default`].
///
/// Times (`cell_update_rate`, `probe_rate`) are in microseconds of virtual
/// time: 100,000 gives 0.1 s scheduler ticks, 1,000,000 gives 1 s probes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSet {
    /// Capacity of the compartment antigen store.
    pub max_antigen: u32,
    /// Capacity of the general cytokine store. Zero in this algorithm: the
    /// only external signals live in dedicated channels and the Type 2
    /// internal cytokine is cell-local state.
    pub max_cytokines: u32,
    /// Maximum resident cell population.
    pub max_cells: u32,
    /// Microseconds of virtual time between scheduler ticks.
    pub cell_update_rate: u64,
    /// Copies stored per injected antigen.
    pub antigen_multiplier: u32,
    /// Number of Type 1 cells.
    pub num_cells_1: u32,
    /// Capacity of each Type 1 cell's internal antigen store.
    pub num_antigen_1: u32,
    /// Antigen sampled from the compartment per Type 1 cell per tick.
    pub num_antigen_receptors_1: u32,
    /// Antigen producers (presentation slots) per Type 1 cell.
    pub num_antigen_producers_1: u32,
    /// Ticks an antigen stays presented before destruction (also the reset
    /// value for the signal-driven action time unless overridden).
    pub antigen_producer_action_time: u32,
    /// Number of Type 2 cells.
    pub num_cells_2: u32,
    /// Ticks before an unmatched Type 2 cell re-randomises its VR locks.
    pub cell_lifespan_2: u32,
    /// Type 1 cells a Type 2 cell binds per tick.
    pub num_cell_receptors_2: u32,
    /// VR receptor locks per Type 2 cell.
    pub num_vr_receptors_2: u32,
    /// Response producers per Type 2 cell.
    pub num_response_producers_2: u32,
    /// Microseconds of virtual time between probe snapshots.
    pub probe_rate: u64,
    /// Seed for the engine RNG stream.
    pub rng_seed: u64,
    /// Exclusive upper bound for VR lock randomisation.
    pub syscall_alphabet_max: u32,
}

impl Default for ParameterSet {
    fn default() -> Self {
        ParameterSet {
            max_antigen: 1000,
            max_cytokines: 0,
            max_cells: 100,
            cell_update_rate: 100_000,
            antigen_multiplier: 10,
            num_cells_1: 50,
            num_antigen_1: 100,
            num_antigen_receptors_1: 10,
            num_antigen_producers_1: 10,
            antigen_producer_action_time: 10,
            num_cells_2: 50,
            cell_lifespan_2: 100,
            num_cell_receptors_2: 2,
            num_vr_receptors_2: 20,
            num_response_producers_2: 1,
            probe_rate: 1_000_000,
            rng_seed: 0,
            syscall_alphabet_max: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("line {line}: expected `name = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown parameter `{name}`")]
    UnknownName { line: usize, name: String },
    #[error("line {line}: bad value for `{name}`: `{value}`")]
    BadValue {
        line: usize,
        name: String,
        value: String,
    },
    #[error("invalid parameters: {field}: {reason}")]
    Invalid {
        field: &'static str,
        reason: &'static str,
    },
}

impl ParameterSet {
    /// Checks the structural invariants. Called by [`parse_params`] and by
    /// the engine constructor.
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.cell_update_rate == 0 {
            return Err(ParamError::Invalid {
                field: "cell_update_rate",
                reason: "must be > 0",
            });
        }
        if self.probe_rate == 0 {
            return Err(ParamError::Invalid {
                field: "probe_rate",
                reason: "must be > 0",
            });
        }
        if self.antigen_multiplier < 1 {
            return Err(ParamError::Invalid {
                field: "antigen_multiplier",
                reason: "must be >= 1",
            });
        }
        if self.num_cells_1 + self.num_cells_2 > self.max_cells {
            return Err(ParamError::Invalid {
                field: "max_cells",
                reason: "num_cells_1 + num_cells_2 exceeds max_cells",
            });
        }
        if self.syscall_alphabet_max == 0 && self.num_cells_2 > 0 && self.num_vr_receptors_2 > 0 {
            return Err(ParamError::Invalid {
                field: "syscall_alphabet_max",
                reason: "must be > 0 when VR receptors are drawn",
            });
        }
        Ok(())
    }
}

/// Parses parameter-file text: one `name = value` per line, `#` comments,
/// blank lines allowed. Missing names take defaults, unknown names are
/// errors. The returned set is validated.
pub fn parse_params(text: &str) -> Result<ParameterSet, ParamError> {
    let mut params = ParameterSet::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (name, value) = content.split_once('=').ok_or_else(|| ParamError::Malformed {
            line,
            text: content.to_string(),
        })?;
        let name = name.trim();
        let value = value.trim();
        if name.is_empty() || value.is_empty() {
            return Err(ParamError::Malformed {
                line,
                text: content.to_string(),
            });
        }
        set_field(&mut params, name, value, line)?;
    }
    params.validate()?;
    Ok(params)
}

fn set_field(
    params: &mut ParameterSet,
    name: &str,
    value: &str,
    line: usize,
) -> Result<(), ParamError> {
    fn parse<T: core::str::FromStr>(
        name: &str,
        value: &str,
        line: usize,
    ) -> Result<T, ParamError> {
        value.parse().map_err(|_| ParamError::BadValue {
            line,
            name: name.to_string(),
            value: value.to_string(),
        })
    }

    match name {
        "max_antigen" => params.max_antigen = parse(name, value, line)?,
        "max_cytokines" => params.max_cytokines = parse(name, value, line)?,
        "max_cells" => params.max_cells = parse(name, value, line)?,
        "cell_update_rate" => params.cell_update_rate = parse(name, value, line)?,
        "antigen_multiplier" => params.antigen_multiplier = parse(name, value, line)?,
        "num_cells_1" => params.num_cells_1 = parse(name, value, line)?,
        "num_antigen_1" => params.num_antigen_1 = parse(name, value, line)?,
        "num_antigen_receptors_1" => params.num_antigen_receptors_1 = parse(name, value, line)?,
        "num_antigen_producers_1" => params.num_antigen_producers_1 = parse(name, value, line)?,
        "antigen_producer_action_time" => {
            params.antigen_producer_action_time = parse(name, value, line)?
        }
        "num_cells_2" => params.num_cells_2 = parse(name, value, line)?,
        "cell_lifespan_2" => params.cell_lifespan_2 = parse(name, value, line)?,
        "num_cell_receptors_2" => params.num_cell_receptors_2 = parse(name, value, line)?,
        "num_vr_receptors_2" => params.num_vr_receptors_2 = parse(name, value, line)?,
        "num_response_producers_2" => params.num_response_producers_2 = parse(name, value, line)?,
        "probe_rate" => params.probe_rate = parse(name, value, line)?,
        "rng_seed" => params.rng_seed = parse(name, value, line)?,
        "syscall_alphabet_max" => params.syscall_alphabet_max = parse(name, value, line)?,
        _ => {
            return Err(ParamError::UnknownName {
                line,
                name: name.to_string(),
            })
        }
    }
    Ok(())
}
