//! Plain-text solver checkpoints.
//!
//! A header of `key = value` lines is followed by a `fields` marker and one
//! `u v w z` line per cell in row-major order. Floats are written in
//! shortest round-trip form, so a restored run continues bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, GridState, SystemParams};

const MAGIC: &str = "b4-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub dt: f64,
    pub params: SystemParams,
    pub state: GridState,
}

impl Checkpoint {
    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn to_text(&self) -> String {
        let s = &self.state;
        let mut out = String::with_capacity(64 * s.len() + 512);
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "step = {}", self.step);
        let _ = writeln!(out, "dt = {}", self.dt);
        for (name, value) in self.params.named_values() {
            let _ = writeln!(out, "{name} = {value}");
        }
        let _ = writeln!(out, "nx = {}", s.nx);
        let _ = writeln!(out, "ny = {}", s.ny);
        let _ = writeln!(out, "dx = {}", s.dx);
        let _ = writeln!(out, "dy = {}", s.dy);
        let _ = writeln!(out, "bc = {}", s.bc.as_str());
        out.push_str("fields\n");
        for i in 0..s.len() {
            let [u, v, w, z] = std::array::from_fn(|k| s.fields[k][i]);
            let _ = writeln!(out, "{u} {v} {w} {z}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Checkpoint> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let bad = |row: usize, msg: String| Error::Parse { row, msg };

        let (_, first) = lines.next().ok_or_else(|| bad(1, "empty checkpoint".into()))?;
        match first.split_once(' ') {
            Some((MAGIC, v)) if v.trim() == VERSION.to_string() => {}
            Some((MAGIC, v)) => return Err(bad(1, format!("unsupported checkpoint version {v}"))),
            _ => return Err(bad(1, "not a checkpoint file".into())),
        }

        let mut header = std::collections::HashMap::new();
        let mut fields_row = None;
        for (row, line) in lines.by_ref() {
            if line.trim() == "fields" {
                fields_row = Some(row);
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(row, format!("expected 'key = value', got '{line}'")))?;
            header.insert(k.trim().to_string(), (row, v.trim().to_string()));
        }
        let fields_row = fields_row.ok_or_else(|| bad(0, "missing 'fields' section".into()))?;
        fn get<T: std::str::FromStr>(
            header: &std::collections::HashMap<String, (usize, String)>,
            key: &str,
            end: usize,
        ) -> Result<T> {
            let (row, raw) = header
                .get(key)
                .ok_or_else(|| Error::Parse { row: end, msg: format!("missing header key '{key}'") })?;
            raw.parse().map_err(|_| Error::Parse { row: *row, msg: format!("bad value '{raw}' for {key}") })
        }
        let f = |k: &str| get::<f64>(&header, k, fields_row);
        let params = SystemParams {
            alpha: f("alpha")?,
            beta: f("beta")?,
            coupling: [f("d1")?, f("d2")?, f("d3")?, f("d4")?],
            diffusion: [f("a")?, f("b")?, f("c")?, f("d")?],
        };
        let nx: usize = get(&header, "nx", fields_row)?;
        let ny: usize = get(&header, "ny", fields_row)?;
        let bc: BoundaryCondition = get::<String>(&header, "bc", fields_row)?
            .parse()
            .map_err(|m: String| bad(fields_row, m))?;
        let mut state = GridState::uniform(nx, ny, f("dx")?, f("dy")?, Default::default(), bc)?;

        let cells = nx * ny;
        let mut count = 0;
        for (row, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if count == cells {
                return Err(bad(row, format!("more than {cells} cell rows")));
            }
            let mut parts = line.split_whitespace();
            for k in 0..4 {
                let raw = parts.next().ok_or_else(|| bad(row, "expected four values".into()))?;
                state.fields[k][count] = raw.parse().map_err(|_| bad(row, format!("bad number '{raw}'")))?;
            }
            if parts.next().is_some() {
                return Err(bad(row, "expected four values".into()));
            }
            count += 1;
        }
        if count != cells {
            return Err(bad(0, format!("expected {cells} cell rows, found {count}")));
        }
        Ok(Checkpoint {
            step: get(&header, "step", fields_row)?,
            dt: f("dt")?,
            params,
            state,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        Checkpoint::parse(&fs::read_to_string(path)?)
    }
}
