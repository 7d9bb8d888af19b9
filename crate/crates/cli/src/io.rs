//! Scenario and profile loading.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use vlmarket_core::model::{
    builtin_ieee30, builtin_seven_bus, builtin_temporal, DemandProfile, Ieee30Config, Scenario,
};

use crate::args::Source;
use crate::profile;

/// Reads JSON, reporting schema errors with the path of the offending field.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_json(&text).with_context(|| format!("in {}", path.display()))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            anyhow!("schema error: {}", e.inner())
        } else {
            anyhow!("schema error at {path}: {}", e.inner())
        }
    })
}

/// Validation failures listed one per line.
pub fn check_valid(s: &Scenario) -> Result<()> {
    let v = s.validate();
    if v.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = v.iter().map(|x| format!("  {x}")).collect();
    bail!("scenario is invalid:\n{}", lines.join("\n"))
}

pub fn load_profile(src: &Source) -> Result<DemandProfile> {
    if let Some(p) = &src.profile {
        let prof: DemandProfile = read_json(p)?;
        prof.check().map_err(|e| anyhow!("{}: {e}", p.display()))?;
        return Ok(prof);
    }
    Ok(profile::generate(src.profile_seed.unwrap_or(1)))
}

pub fn builtin(selector: &str, src: &Source) -> Result<Scenario> {
    let (family, arg) = match selector.split_once(':') {
        Some((f, a)) => (f.trim(), Some(a.trim())),
        None => (selector.trim(), None),
    };
    let id = || -> Result<usize> {
        arg.ok_or_else(|| anyhow!("selector `{selector}` needs a scenario number"))?
            .parse()
            .map_err(|_| anyhow!("selector `{selector}` has a bad scenario number"))
    };
    let s = match family {
        "temporal" => builtin_temporal(id()?)?,
        "sevenbus" => builtin_seven_bus(id()?)?,
        "ieee30" => {
            let links = match arg {
                None => true,
                Some("novl") => false,
                Some(other) => bail!("unknown ieee30 variant `{other}`"),
            };
            builtin_ieee30(links, &load_profile(src)?, &Ieee30Config::default())?
        }
        other => bail!("unknown builtin family `{other}`"),
    };
    Ok(s)
}

pub fn load_scenario(src: &Source) -> Result<Scenario> {
    let s = match (&src.builtin, &src.scenario) {
        (Some(b), None) => builtin(b, src)?,
        (None, Some(p)) => read_json(p)?,
        (None, None) => bail!("give --builtin or --scenario"),
        (Some(_), Some(_)) => bail!("--builtin and --scenario are exclusive"),
    };
    check_valid(&s)?;
    Ok(s)
}
