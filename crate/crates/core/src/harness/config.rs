use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::engine::ProtocolSpec;
use crate::error::{Error, Result};
use crate::net::{NetworkConfig, Position};

/// Everything needed to reproduce a batch of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub config: NetworkConfig,
    pub protocols: Vec<ProtocolSpec>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

pub const DEFAULT_SEED_COUNT: u64 = 30;
pub const DEFAULT_OUTPUT_DIR: &str = "results";

impl ExperimentPlan {
    pub fn new(config: NetworkConfig, protocols: Vec<ProtocolSpec>, seeds: Vec<u64>) -> Self {
        Self {
            config,
            protocols,
            seeds,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.protocols.is_empty() {
            return Err(Error::invalid("protocols", "at least one protocol is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds", "at least one seed is required"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::invalid("seeds", format!("seed {dup} appears twice")));
        }
        let mut names = HashSet::new();
        if let Some(dup) = self.protocols.iter().find(|p| !names.insert(p.name())) {
            return Err(Error::invalid("protocols", format!("{dup} appears twice")));
        }
        Ok(())
    }

    /// Renders the plan in the config file format; parsing the output
    /// yields the same plan.
    pub fn to_config_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "[network]");
        let _ = writeln!(out, "n = {}", c.n);
        let _ = writeln!(out, "a = {}", c.a);
        let _ = writeln!(out, "bs = {}, {}", c.bs_pos.x, c.bs_pos.y);
        let _ = writeln!(out, "nu = {}", c.nu);
        let _ = writeln!(out, "b = {}", c.b);
        let _ = writeln!(out, "eps0 = {}", c.eps0);
        let _ = writeln!(out, "[radio]");
        let _ = writeln!(out, "packet_bits = {}", c.packet_bits);
        let _ = writeln!(out, "eps_elec = {:e}", c.eps_elec);
        let _ = writeln!(out, "eps_fs = {:e}", c.eps_fs);
        let _ = writeln!(out, "eps_mp = {:e}", c.eps_mp);
        let _ = writeln!(out, "[experiment]");
        let _ = writeln!(out, "max_rounds = {}", c.max_rounds);
        let names: Vec<String> = self.protocols.iter().map(ProtocolSpec::name).collect();
        let _ = writeln!(out, "protocols = {}", names.join(", "));
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "seeds = [{}]", seeds.join(", "));
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Network,
    Radio,
    Experiment,
}

enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{key}`: cannot parse `{value}`"),
    })
}

/// Parses the line-oriented experiment format.
///
/// ```text
/// [network]
/// n = 100
/// bs = 50, 50
/// [experiment]
/// protocols = sep, pc-kmeanspp
/// seeds = 30          # count, starting at base_seed
/// base_seed = 1
/// ```
///
/// `seeds = [4, 8, 15]` gives an explicit list. `#` starts a comment.
/// Missing keys take the canonical defaults; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentPlan> {
    let mut config = NetworkConfig::default();
    let mut bs: Option<Position> = None;
    let mut protocols = Vec::new();
    let mut seeds = Seeds::Count(DEFAULT_SEED_COUNT);
    let mut base_seed = 1u64;
    let mut output_dir = PathBuf::from(DEFAULT_OUTPUT_DIR);
    let mut section = None;
    let mut seen = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = Some(match name.trim() {
                "network" => Section::Network,
                "radio" => Section::Radio,
                "experiment" => Section::Experiment,
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown section `[{other}]`"),
                    })
                }
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let section = section.ok_or_else(|| Error::Parse {
            line,
            msg: format!("`{key}` appears before any section"),
        })?;
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }

        match (section, key) {
            (Section::Network, "n") => config.n = parse_num(line, key, value)?,
            (Section::Network, "a") => config.a = parse_num(line, key, value)?,
            (Section::Network, "bs") => {
                let (x, y) = value.split_once(',').ok_or_else(|| Error::Parse {
                    line,
                    msg: "`bs` must be `x, y`".into(),
                })?;
                bs = Some(Position::new(parse_num(line, key, x.trim())?, parse_num(line, key, y.trim())?));
            }
            (Section::Network, "nu") => config.nu = parse_num(line, key, value)?,
            (Section::Network, "b") => config.b = parse_num(line, key, value)?,
            (Section::Network, "eps0") => config.eps0 = parse_num(line, key, value)?,
            (Section::Radio, "packet_bits") => config.packet_bits = parse_num(line, key, value)?,
            (Section::Radio, "eps_elec") => config.eps_elec = parse_num(line, key, value)?,
            (Section::Radio, "eps_fs") => config.eps_fs = parse_num(line, key, value)?,
            (Section::Radio, "eps_mp") => config.eps_mp = parse_num(line, key, value)?,
            (Section::Experiment, "max_rounds") => config.max_rounds = parse_num(line, key, value)?,
            (Section::Experiment, "protocols") => {
                protocols = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|name| {
                        ProtocolSpec::parse(name).map_err(|_| Error::Parse {
                            line,
                            msg: format!("unknown protocol `{name}`"),
                        })
                    })
                    .collect::<Result<_>>()?;
            }
            (Section::Experiment, "seeds") => {
                seeds = if let Some(list) = value.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                    Seeds::List(
                        list.split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|s| parse_num(line, key, s))
                            .collect::<Result<_>>()?,
                    )
                } else {
                    Seeds::Count(parse_num(line, key, value)?)
                };
            }
            (Section::Experiment, "base_seed") => base_seed = parse_num(line, key, value)?,
            (Section::Experiment, "output_dir") => output_dir = PathBuf::from(value),
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{key}` in this section"),
                })
            }
        }
    }

    config.bs_pos = bs.unwrap_or(Position::new(config.a / 2.0, config.a / 2.0));
    let seeds = match seeds {
        Seeds::List(list) => list,
        Seeds::Count(count) => (0..count).map(|i| base_seed.wrapping_add(i)).collect(),
    };
    let plan = ExperimentPlan {
        config,
        protocols,
        seeds,
        output_dir,
    };
    plan.validate()?;
    Ok(plan)
}
