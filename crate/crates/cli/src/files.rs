use anyhow::{bail, Context, Result};
use cspdd::bilevel::{BigMRule, BilevelSolution, CpspInstance};
use cspdd::robust::{RobustSolution, RtsptwInstance};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub enum Instance {
    Cpsp(CpspInstance),
    Rtsptw(RtsptwInstance),
}

impl Instance {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Instance::Cpsp(c) => c.meta.as_ref().map(|m| m.seed),
            Instance::Rtsptw(r) => r.meta.as_ref().map(|m| m.seed),
        }
    }
}

/// Solution files carry their kind so `check` knows what to verify.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolutionFile {
    Bilevel {
        /// Big-M rule the duals were computed under.
        big_m: BigMRule,
        solution: BilevelSolution,
    },
    Robust {
        solution: RobustSolution,
    },
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or to stdout without one.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Loads either instance kind; RTSPTW files are recognised by their edge list.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let value: serde_json::Value =
        serde_json::from_str(&read(path)?).with_context(|| format!("{} is not valid JSON", path.display()))?;
    let Some(obj) = value.as_object() else { bail!("{}: expected a JSON object", path.display()) };
    let inst = if obj.contains_key("edges") {
        let r: RtsptwInstance = serde_json::from_value(value).context("malformed RTSPTW instance")?;
        r.validate()?;
        Instance::Rtsptw(r)
    } else if obj.contains_key("c_leader") {
        let c: CpspInstance = serde_json::from_value(value).context("malformed CPSP instance")?;
        c.to_bilevel().validate()?;
        Instance::Cpsp(c)
    } else {
        bail!("{}: neither a CPSP nor an RTSPTW instance", path.display())
    };
    Ok(inst)
}

pub fn load_solution(path: &Path) -> Result<SolutionFile> {
    serde_json::from_str(&read(path)?).with_context(|| format!("{} is not a solution file", path.display()))
}
