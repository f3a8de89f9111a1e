//! Plain-text scenario files.
//!
//! ```text
//! offload-scenario v1
//! urgency_penalty = 0.02
//! slot_width = 0.005
//! horizon = 12.5
//! rng_seed = 7
//! # bandwidth tx_power channel_gain noise_power_density bandwidth_cap
//! channel = 12500000.0 0.2 1.0 0.013333333333333334 20000000.0
//! channel_override 3 = 12500000.0 0.2 0.5 0.013333333333333334 20000000.0
//! [servers]
//! # id cpu_frequency cpu_count
//! 0 2200000000.0 1
//! [tasks]
//! # id ue_id arrival size_bits cycles deadline processing_time urgent
//! 0 0 0.31 1200000.0 88000000.0 0.61 0.04 0
//! ```
//!
//! Reals are written in shortest round-trip form, so parsing a serialized
//! scenario reproduces it bit for bit. `#` starts a comment line.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{OffloadError, Result};
use crate::model::{ensure_valid, ChannelParams, Scenario, Server, Task};

pub const HEADER: &str = "offload-scenario v1";

fn channel_fields(c: &ChannelParams) -> String {
    format!(
        "{:?} {:?} {:?} {:?} {:?}",
        c.bandwidth, c.tx_power, c.channel_gain, c.noise_power_density, c.bandwidth_cap
    )
}

pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "urgency_penalty = {:?}", s.urgency_penalty);
    let _ = writeln!(out, "slot_width = {:?}", s.slot_width);
    let _ = writeln!(out, "horizon = {:?}", s.horizon);
    let _ = writeln!(out, "rng_seed = {}", s.rng_seed);
    let _ = writeln!(
        out,
        "# bandwidth tx_power channel_gain noise_power_density bandwidth_cap"
    );
    let _ = writeln!(out, "channel = {}", channel_fields(&s.channel));
    for (ue, c) in &s.channel_overrides {
        let _ = writeln!(out, "channel_override {ue} = {}", channel_fields(c));
    }
    let _ = writeln!(out, "[servers]");
    let _ = writeln!(out, "# id cpu_frequency cpu_count");
    for srv in &s.servers {
        let _ = writeln!(out, "{} {:?} {}", srv.id, srv.cpu_frequency, srv.cpu_count);
    }
    let _ = writeln!(out, "[tasks]");
    let _ = writeln!(
        out,
        "# id ue_id arrival size_bits cycles deadline processing_time urgent"
    );
    for t in &s.tasks {
        let _ = writeln!(
            out,
            "{} {} {:?} {:?} {:?} {:?} {:?} {}",
            t.id,
            t.ue_id,
            t.arrival,
            t.size_bits,
            t.cycles,
            t.deadline,
            t.processing_time,
            u8::from(t.urgent)
        );
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Servers,
    Tasks,
}

struct Fields<'a> {
    line: usize,
    parts: std::str::SplitWhitespace<'a>,
}

impl Fields<'_> {
    fn next<T: FromStr>(&mut self, name: &str) -> Result<T> {
        let line = self.line;
        let raw = self.parts.next().ok_or_else(|| OffloadError::Parse {
            line,
            message: format!("missing field `{name}`"),
        })?;
        raw.parse().map_err(|_| OffloadError::Parse {
            line,
            message: format!("bad value `{raw}` for `{name}`"),
        })
    }

    fn finish(mut self) -> Result<()> {
        match self.parts.next() {
            None => Ok(()),
            Some(extra) => Err(OffloadError::Parse {
                line: self.line,
                message: format!("unexpected trailing field `{extra}`"),
            }),
        }
    }
}

fn channel_from(f: &mut Fields) -> Result<ChannelParams> {
    Ok(ChannelParams {
        bandwidth: f.next("bandwidth")?,
        tx_power: f.next("tx_power")?,
        channel_gain: f.next("channel_gain")?,
        noise_power_density: f.next("noise_power_density")?,
        bandwidth_cap: f.next("bandwidth_cap")?,
    })
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let err = |line: usize, message: String| OffloadError::Parse { line, message };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    match lines.by_ref().find(|(_, l)| !l.is_empty() && !l.starts_with('#')) {
        Some((_, HEADER)) => {}
        Some((n, other)) => return Err(err(n, format!("expected `{HEADER}`, found `{other}`"))),
        None => return Err(err(1, "empty scenario file".into())),
    }

    let mut section = Section::Header;
    let mut keys: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut overrides = BTreeMap::new();
    let mut servers = Vec::new();
    let mut tasks = Vec::new();
    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[servers]" if section == Section::Header => {
                section = Section::Servers;
                continue;
            }
            "[tasks]" if section == Section::Servers => {
                section = Section::Tasks;
                continue;
            }
            _ if line.starts_with('[') => return Err(err(n, format!("unexpected section `{line}`"))),
            _ => {}
        }
        match section {
            Section::Header => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| err(n, format!("expected `key = value`, found `{line}`")))?;
                let (key, value) = (key.trim(), value.trim());
                if let Some(ue) = key.strip_prefix("channel_override") {
                    let ue: usize = ue.trim().parse().map_err(|_| err(n, format!("bad UE id in `{key}`")))?;
                    let mut f = Fields {
                        line: n,
                        parts: value.split_whitespace(),
                    };
                    let c = channel_from(&mut f)?;
                    f.finish()?;
                    if overrides.insert(ue, c).is_some() {
                        return Err(err(n, format!("duplicate override for UE {ue}")));
                    }
                } else if keys.insert(key, (n, value)).is_some() {
                    return Err(err(n, format!("duplicate key `{key}`")));
                }
            }
            Section::Servers => {
                let mut f = Fields {
                    line: n,
                    parts: line.split_whitespace(),
                };
                servers.push(Server {
                    id: f.next("id")?,
                    cpu_frequency: f.next("cpu_frequency")?,
                    cpu_count: f.next("cpu_count")?,
                });
                f.finish()?;
            }
            Section::Tasks => {
                let mut f = Fields {
                    line: n,
                    parts: line.split_whitespace(),
                };
                let task = Task {
                    id: f.next("id")?,
                    ue_id: f.next("ue_id")?,
                    arrival: f.next("arrival")?,
                    size_bits: f.next("size_bits")?,
                    cycles: f.next("cycles")?,
                    deadline: f.next("deadline")?,
                    processing_time: f.next("processing_time")?,
                    urgent: match f.next::<u8>("urgent")? {
                        0 => false,
                        1 => true,
                        v => return Err(err(n, format!("urgent flag must be 0 or 1, got {v}"))),
                    },
                };
                f.finish()?;
                tasks.push(task);
            }
        }
    }
    if section != Section::Tasks {
        return Err(err(
            text.lines().count().max(1),
            "missing [servers] or [tasks] section".into(),
        ));
    }

    let end = text.lines().count();
    let mut take = |key: &str| keys.remove(key).ok_or_else(|| err(end, format!("missing key `{key}`")));
    let real = |(n, v): (usize, &str), key: &str| -> Result<f64> {
        v.parse().map_err(|_| err(n, format!("bad value `{v}` for `{key}`")))
    };
    let urgency_penalty = real(take("urgency_penalty")?, "urgency_penalty")?;
    let slot_width = real(take("slot_width")?, "slot_width")?;
    let horizon = real(take("horizon")?, "horizon")?;
    let (n, v) = take("rng_seed")?;
    let rng_seed = v
        .parse()
        .map_err(|_| err(n, format!("bad value `{v}` for `rng_seed`")))?;
    let (n, v) = take("channel")?;
    let mut f = Fields {
        line: n,
        parts: v.split_whitespace(),
    };
    let channel = channel_from(&mut f)?;
    f.finish()?;
    if let Some((key, (n, _))) = keys.into_iter().next() {
        return Err(err(n, format!("unknown key `{key}`")));
    }

    let s = Scenario {
        tasks,
        servers,
        channel,
        channel_overrides: overrides,
        urgency_penalty,
        slot_width,
        horizon,
        rng_seed,
    };
    ensure_valid(&s)?;
    Ok(s)
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| OffloadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn write_scenario(path: &Path, s: &Scenario) -> Result<()> {
    std::fs::write(path, serialize_scenario(s)).map_err(|source| OffloadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{scenario, task};

    #[test]
    fn round_trip_with_override() {
        let mut s = scenario(vec![task(0, 0.1, 0.3, 1.7), task(1, 0.25, 0.2, 2.0)], 2, 0.1, 2.1);
        s.tasks[1].urgent = true;
        s.tasks[1].ue_id = 3;
        s.rng_seed = u64::MAX;
        let mut c = s.channel.clone();
        c.channel_gain = 0.3;
        s.channel_overrides.insert(3, c);
        let text = serialize_scenario(&s);
        assert!(text.starts_with("offload-scenario v1\n"));
        assert_eq!(parse_scenario(&text).unwrap(), s);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let s = scenario(vec![task(0, 0.1, 0.3, 1.7)], 1, 0.1, 2.0);
        let text = serialize_scenario(&s).replace(" 0\n", " 2\n");
        match parse_scenario(&text) {
            Err(OffloadError::Parse { line, .. }) => assert_eq!(line, text.lines().count()),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_scenario("offload-scenario v2\n"),
            Err(OffloadError::Parse { line: 1, .. })
        ));
        assert!(parse_scenario(&serialize_scenario(&s).replace("horizon", "horizn")).is_err());
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let s = scenario(vec![task(0, 0.1, 0.3, 1.7)], 1, 0.1, 2.0);
        let text = serialize_scenario(&s).replace("slot_width = 0.1", "slot_width = -1.0");
        assert!(matches!(parse_scenario(&text), Err(OffloadError::InvalidScenario(_))));
    }
}
