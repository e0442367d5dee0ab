//! Scenario files.
//!
//! A scenario is a plain-text file of `[section]` headers followed by
//! `key = value` lines. `#` and `;` start comment lines. `[scenario]`,
//! `[ios]`, `[element]` and `[table]` appear at most once; `[antenna]` and
//! `[user]` repeat, one block per antenna or user.
//!
//! ```text
//! [scenario]
//! frequency_hz = 3.6e9
//! direct_link = blocked        # or free-space
//!
//! [ios]
//! rows = 3
//! cols = 3
//! dx = 0.04
//! dy = 0.04
//!
//! [element]
//! gain = 1
//! area_m2 = 0.0016             # defaults to dx * dy
//! exponent_n = 1
//! composition = offset-product # or average
//!
//! [antenna]
//! position = 0.5, 0, 0.866
//! gain = 1
//! exponent = 0
//!
//! [user]
//! position = -0.5, 0, -0.866
//!
//! [table]
//! file = table.csv             # relative to the scenario file
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::channel::{Antenna, DirectLink, Scenario};
use crate::element::{CompositionRule, ElementModel, ElementPatternParams, ElementResponseTable};
use crate::error::{Error, Result};
use crate::geometry::{IosGrid, Vec3};

/// Environment variable naming a response table that replaces the bundled one.
pub const TABLE_PATH_ENV: &str = "IOS_TABLE_PATH";

const SINGLETONS: [&str; 4] = ["scenario", "ios", "element", "table"];
const REPEATED: [&str; 2] = ["antenna", "user"];

#[derive(Debug, Clone)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).map_err(|_| Error::Syntax {
                line,
                message: format!("[{}] {key}: '{v}' is not a number", self.name),
            }),
        }
    }

    fn required_number(&mut self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| Error::Config(format!("{key} required (section [{}] at line {})", self.name, self.line)))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let (line, v) = self
            .take(key)
            .ok_or_else(|| Error::Config(format!("{key} required (section [{}] at line {})", self.name, self.line)))?;
        v.parse::<usize>().map_err(|_| Error::Syntax {
            line,
            message: format!("[{}] {key}: '{v}' is not a count", self.name),
        })
    }

    fn parse_with<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => f(&v).map(Some).map_err(|e| Error::Syntax {
                line,
                message: e.to_string(),
            }),
        }
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::Syntax {
                line,
                message: format!("unknown key '{key}' in [{}]", self.name),
            }),
        }
    }
}

/// Options controlling how a scenario file is resolved.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Directory that relative table paths are resolved against.
    pub base_dir: Option<PathBuf>,
    /// `section.key = value` overrides applied to singleton sections.
    pub overrides: Vec<(String, String)>,
}

/// Parses scenario text with default options.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_scenario_with(text, &ParseOptions::default())
}

pub fn parse_scenario_file(path: &Path, overrides: &[(String, String)]) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario_with(
        &text,
        &ParseOptions {
            base_dir: path.parent().map(Path::to_path_buf),
            overrides: overrides.to_vec(),
        },
    )
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') || content.starts_with(';') {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Syntax {
                    line,
                    message: format!("unterminated section header '{content}'"),
                })?
                .trim()
                .to_ascii_lowercase();
            if !SINGLETONS.contains(&name.as_str()) && !REPEATED.contains(&name.as_str()) {
                return Err(Error::Syntax {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            if SINGLETONS.contains(&name.as_str()) && sections.iter().any(|s| s.name == name) {
                return Err(Error::Syntax {
                    line,
                    message: format!("section [{name}] appears more than once"),
                });
            }
            sections.push(Section {
                name,
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Syntax {
            line,
            message: format!("expected 'key = value', found '{content}'"),
        })?;
        let value = value.split(" #").next().unwrap_or_default();
        let section = sections.last_mut().ok_or_else(|| Error::Syntax {
            line,
            message: "key outside of any section".into(),
        })?;
        let key = key.trim().to_ascii_lowercase();
        if section
            .entries
            .insert(key.clone(), (line, value.trim().to_string()))
            .is_some()
        {
            return Err(Error::Syntax {
                line,
                message: format!("duplicate key '{key}' in [{}]", section.name),
            });
        }
    }
    Ok(sections)
}

fn parse_vec3(s: &str) -> Result<Vec3> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("invalid position '{s}', expected 'x, y, z'")))?;
    match parts.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(Error::Config(format!(
            "invalid position '{s}', expected 'x, y, z'"
        ))),
    }
}

fn parse_antenna(mut sec: Section, index: usize) -> Result<Antenna> {
    let what = sec.name.clone();
    let header = sec.line;
    let position = sec
        .parse_with("position", parse_vec3)?
        .ok_or_else(|| Error::Config(format!("line {header}: [{what}] {index}: position required")))?;
    let gain = sec.number("gain")?.unwrap_or(1.0);
    let exponent = sec.number("exponent")?.unwrap_or(0.0);
    sec.finish()?;
    let antenna = Antenna::new(position, gain, exponent);
    if position.z == 0.0 {
        return Err(Error::Config(format!(
            "line {header}: {what} {index} at {position} lies on the surface plane (z = 0)"
        )));
    }
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::Config(format!(
            "line {header}: {what} {index}: gain must be positive, got {gain}"
        )));
    }
    if !(exponent >= 0.0 && exponent.is_finite()) {
        return Err(Error::Config(format!(
            "line {header}: {what} {index}: exponent must be non-negative, got {exponent}"
        )));
    }
    Ok(antenna)
}

fn resolve_table(file: Option<String>, base_dir: Option<&Path>) -> Result<ElementResponseTable> {
    let path = match file {
        Some(f) => {
            let p = PathBuf::from(f);
            match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            }
        }
        None => match std::env::var_os(TABLE_PATH_ENV) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => return Ok(ElementResponseTable::bundled()),
        },
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    ElementResponseTable::from_csv(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn parse_scenario_with(text: &str, options: &ParseOptions) -> Result<Scenario> {
    let mut sections = split_sections(text)?;
    for (path, value) in &options.overrides {
        let (name, key) = path.split_once('.').ok_or_else(|| {
            Error::Config(format!("override '{path}' must look like section.key"))
        })?;
        if !SINGLETONS.contains(&name) {
            return Err(Error::Config(format!(
                "override '{path}': only [scenario], [ios], [element] and [table] can be overridden"
            )));
        }
        match sections.iter_mut().find(|s| s.name == name) {
            Some(s) => {
                s.entries.insert(key.to_string(), (0, value.clone()));
            }
            None => sections.push(Section {
                name: name.to_string(),
                line: 0,
                entries: BTreeMap::from([(key.to_string(), (0, value.clone()))]),
            }),
        }
    }

    let mut take_singleton = |name: &str| {
        sections
            .iter()
            .position(|s| s.name == name)
            .map(|i| sections.remove(i))
    };
    let mut scenario = take_singleton("scenario")
        .ok_or_else(|| Error::Config("frequency_hz required (missing [scenario] section)".into()))?;
    let ios = take_singleton("ios");
    let element = take_singleton("element");
    let table = take_singleton("table");

    let frequency_hz = scenario
        .number("frequency_hz")?
        .ok_or_else(|| Error::Config("frequency_hz required".into()))?;
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::Config(format!(
            "frequency_hz must be positive, got {frequency_hz}"
        )));
    }
    let direct_link = scenario
        .parse_with("direct_link", str::parse::<DirectLink>)?
        .unwrap_or_default();
    scenario.finish()?;

    let mut ios = ios.ok_or_else(|| Error::Config("[ios] section required".into()))?;
    let rows = ios.count("rows")?;
    let cols = ios.count("cols")?;
    let dx = ios.required_number("dx")?;
    let dy = ios.required_number("dy")?;
    let ios_line = ios.line;
    ios.finish()?;
    let grid = IosGrid::new(rows, cols, dx, dy)
        .map_err(|e| Error::Config(format!("line {ios_line}: [ios]: {e}")))?;

    let (params, rule) = match element {
        Some(mut sec) => {
            let gain = sec.number("gain")?.unwrap_or(1.0);
            let area = sec.number("area_m2")?.unwrap_or(grid.element_area());
            let n = sec.number("exponent_n")?.unwrap_or(1.0);
            let rule = sec
                .parse_with("composition", str::parse::<CompositionRule>)?
                .unwrap_or_default();
            let line = sec.line;
            sec.finish()?;
            let params = ElementPatternParams::new(gain, area, n)
                .map_err(|e| Error::Config(format!("line {line}: [element]: {e}")))?;
            (params, rule)
        }
        None => (
            ElementPatternParams::new(1.0, grid.element_area(), 1.0)?,
            CompositionRule::default(),
        ),
    };

    let table_file = match table {
        Some(mut sec) => {
            let f = sec.take("file").map(|(_, v)| v);
            sec.finish()?;
            f
        }
        None => None,
    };
    let table = resolve_table(table_file, options.base_dir.as_deref())?;

    let mut bs_antennas = Vec::new();
    let mut users = Vec::new();
    for sec in sections {
        match sec.name.as_str() {
            "antenna" => {
                let a = parse_antenna(sec, bs_antennas.len())?;
                bs_antennas.push(a);
            }
            _ => {
                let u = parse_antenna(sec, users.len())?;
                users.push(u);
            }
        }
    }
    if bs_antennas.is_empty() {
        return Err(Error::Config("at least one [antenna] block required".into()));
    }
    if users.is_empty() {
        return Err(Error::Config("at least one [user] block required".into()));
    }

    Scenario::new(
        frequency_hz,
        grid,
        bs_antennas,
        users,
        ElementModel::new(params, table).with_rule(rule),
        direct_link,
    )
}

/// Serializes a scenario; the response table is referenced, not inlined.
pub fn scenario_to_text(scn: &Scenario, table_file: Option<&str>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "[scenario]\nfrequency_hz = {}\ndirect_link = {}\n\n",
        scn.frequency_hz,
        scn.direct_link.as_str()
    ));
    out.push_str(&format!(
        "[ios]\nrows = {}\ncols = {}\ndx = {}\ndy = {}\n\n",
        scn.grid.rows(),
        scn.grid.cols(),
        scn.grid.dx(),
        scn.grid.dy()
    ));
    let p = &scn.element.params;
    out.push_str(&format!(
        "[element]\ngain = {}\narea_m2 = {}\nexponent_n = {}\ncomposition = {}\n",
        p.gain,
        p.area_m2,
        p.exponent_n,
        scn.element.rule.as_str()
    ));
    for (name, list) in [("antenna", &scn.bs_antennas), ("user", &scn.users)] {
        for a in list {
            out.push_str(&format!(
                "\n[{name}]\nposition = {}, {}, {}\ngain = {}\nexponent = {}\n",
                a.position.x, a.position.y, a.position.z, a.gain, a.exponent
            ));
        }
    }
    if let Some(f) = table_file {
        out.push_str(&format!("\n[table]\nfile = {f}\n"));
    }
    out
}
