//! Plain-text Taxi instance files.
//!
//! One directive per line, `#` starts a comment:
//!
//! ```text
//! grid 5 5                      # width height
//! wall 1 4 east                 # blocks (1,4)->(2,4) and (2,4)->(1,4)
//! depot R 0 4                   # named depot cell
//! taxi ?                        # `?` any cell, or a cell: `l21`, `2 1`, depot name
//! passenger p1 at * dest *      # `*` random depot, `?` any cell
//! goal deliver p1               # passengers that must reach their dest
//! max-steps 500
//! ```
//!
//! Cells are named `l<x><y>` with `x` growing east and `y` growing north.
//! Random placements give passengers pairwise distinct start cells and a
//! destination different from their own start.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    North,
    South,
    East,
    West,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::North, Dir::South, Dir::East, Dir::West];

    pub fn name(self) -> &'static str {
        match self {
            Dir::North => "north",
            Dir::South => "south",
            Dir::East => "east",
            Dir::West => "west",
        }
    }

    pub fn parse(s: &str) -> Option<Dir> {
        Dir::ALL.into_iter().find(|d| d.name() == s)
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::North => Dir::South,
            Dir::South => Dir::North,
            Dir::East => Dir::West,
            Dir::West => Dir::East,
        }
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            Dir::North => (0, 1),
            Dir::South => (0, -1),
            Dir::East => (1, 0),
            Dir::West => (-1, 0),
        }
    }
}

pub type Cell = (u8, u8);

pub fn cell_name((x, y): Cell) -> String {
    format!("l{x}{y}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Placement {
    Fixed(Cell),
    /// Uniform over depots (over all cells when no depot is declared).
    AnyDepot,
    AnyCell,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassengerSpec {
    pub name: String,
    pub start: Placement,
    pub dest: Placement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub width: u8,
    pub height: u8,
    /// Blocked moves, stored for both sides of every segment.
    pub walls: Vec<(Cell, Dir)>,
    pub depots: Vec<(String, Cell)>,
    pub taxi: Placement,
    pub passengers: Vec<PassengerSpec>,
    /// Passengers that must be delivered; all of them when empty in the file.
    pub goal: Vec<String>,
    pub max_episode_steps: usize,
}

impl ProblemInstance {
    pub fn parse(text: &str) -> Result<ProblemInstance> {
        let mut width_height = None;
        let mut walls = Vec::new();
        let mut depots: Vec<(String, Cell)> = Vec::new();
        let mut taxi = None;
        let mut passengers: Vec<(String, String, String, usize)> = Vec::new();
        let mut goal: Option<Vec<String>> = None;
        let mut max_steps = None;
        let mut raw_taxi = None;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Instance(format!("line {line_no}: {msg}"));
            let words: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<u8>().map_err(|_| err(&format!("bad number `{s}`")));
            match words.as_slice() {
                ["grid", w, h] => width_height = Some((num(w)?, num(h)?)),
                ["wall", x, y, d] => {
                    let dir = Dir::parse(d).ok_or_else(|| err(&format!("bad direction `{d}`")))?;
                    walls.push(((num(x)?, num(y)?), dir, line_no));
                }
                ["depot", name, x, y] => depots.push((name.to_string(), (num(x)?, num(y)?))),
                ["taxi", rest @ ..] if !rest.is_empty() => raw_taxi = Some((rest.join(" "), line_no)),
                ["passenger", name, "at", start, "dest", dest] => {
                    passengers.push((name.to_string(), start.to_string(), dest.to_string(), line_no))
                }
                ["goal", "deliver", names @ ..] => goal = Some(names.iter().map(|s| s.to_string()).collect()),
                ["max-steps", n] => {
                    max_steps = Some(n.parse::<usize>().map_err(|_| err(&format!("bad number `{n}`")))?)
                }
                _ => return Err(err(&format!("unrecognized directive `{line}`"))),
            }
        }

        let (width, height) =
            width_height.ok_or_else(|| Error::Instance("missing `grid` line".into()))?;
        if width == 0 || height == 0 || width > 10 || height > 10 {
            return Err(Error::Instance(format!("grid {width}x{height} outside 1..=10")));
        }
        let in_grid = |(x, y): Cell| x < width && y < height;
        for (name, c) in &depots {
            if !in_grid(*c) {
                return Err(Error::Instance(format!("depot {name} outside the grid")));
            }
        }
        let resolve = |s: &str, line: usize| -> Result<Placement> {
            let err = |msg: String| Error::Instance(format!("line {line}: {msg}"));
            let cell = match s {
                "*" => return Ok(Placement::AnyDepot),
                "?" => return Ok(Placement::AnyCell),
                _ => {
                    if let Some((_, c)) = depots.iter().find(|(n, _)| n == s) {
                        *c
                    } else if let Some(c) = parse_cell(s) {
                        c
                    } else {
                        return Err(err(format!("bad cell `{s}`")));
                    }
                }
            };
            if !in_grid(cell) {
                return Err(err(format!("cell `{s}` outside the grid")));
            }
            Ok(Placement::Fixed(cell))
        };

        let mut all_walls = Vec::new();
        for (c, d, line) in walls {
            let (dx, dy) = d.delta();
            let (nx, ny) = (c.0 as i32 + dx, c.1 as i32 + dy);
            if !in_grid(c) || nx < 0 || ny < 0 || !in_grid((nx as u8, ny as u8)) {
                return Err(Error::Instance(format!("line {line}: wall must separate two grid cells")));
            }
            all_walls.push((c, d));
            all_walls.push(((nx as u8, ny as u8), d.opposite()));
        }
        all_walls.sort();
        all_walls.dedup();

        if let Some((t, line)) = raw_taxi {
            let t = t.replace(' ', ",");
            let p = match t.split_once(',') {
                Some((x, y)) => match (x.parse::<u8>(), y.parse::<u8>()) {
                    (Ok(x), Ok(y)) if in_grid((x, y)) => Placement::Fixed((x, y)),
                    _ => return Err(Error::Instance(format!("line {line}: bad taxi cell"))),
                },
                None => resolve(&t, line)?,
            };
            taxi = Some(p);
        }

        let mut specs = Vec::new();
        for (name, start, dest, line) in passengers {
            if specs.iter().any(|p: &PassengerSpec| p.name == name) {
                return Err(Error::Instance(format!("line {line}: duplicate passenger {name}")));
            }
            if crate::symbol::Sym::is_variable_name(&name) {
                return Err(Error::Instance(format!("line {line}: passenger names must be lowercase")));
            }
            specs.push(PassengerSpec {
                start: resolve(&start, line)?,
                dest: resolve(&dest, line)?,
                name,
            });
        }
        if specs.is_empty() {
            return Err(Error::Instance("no passengers".into()));
        }
        let goal = goal.unwrap_or_else(|| specs.iter().map(|p| p.name.clone()).collect());
        for g in &goal {
            if !specs.iter().any(|p| &p.name == g) {
                return Err(Error::Instance(format!("goal names unknown passenger {g}")));
            }
        }
        let inst = ProblemInstance {
            width,
            height,
            walls: all_walls,
            depots,
            taxi: taxi.ok_or_else(|| Error::Instance("missing `taxi` line".into()))?,
            passengers: specs,
            goal,
            max_episode_steps: max_steps.unwrap_or(500),
        };
        inst.check_placeable()?;
        Ok(inst)
    }

    pub fn load(path: &std::path::Path) -> Result<ProblemInstance> {
        ProblemInstance::parse(&crate::error::read_text(path)?)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.width).flat_map(move |x| (0..self.height).map(move |y| (x, y)))
    }

    /// Candidate cells for a random depot placement.
    pub fn depot_cells(&self) -> Vec<Cell> {
        if self.depots.is_empty() {
            self.cells().collect()
        } else {
            let mut v: Vec<Cell> = self.depots.iter().map(|(_, c)| *c).collect();
            v.sort();
            v.dedup();
            v
        }
    }

    pub fn candidates(&self, p: &Placement) -> Vec<Cell> {
        match p {
            Placement::Fixed(c) => vec![*c],
            Placement::AnyDepot => self.depot_cells(),
            Placement::AnyCell => self.cells().collect(),
        }
    }

    pub fn is_randomized(&self) -> bool {
        !matches!(self.taxi, Placement::Fixed(_))
            || self
                .passengers
                .iter()
                .any(|p| !matches!(p.start, Placement::Fixed(_)) || !matches!(p.dest, Placement::Fixed(_)))
    }

    fn check_placeable(&self) -> Result<()> {
        let random_starts = self
            .passengers
            .iter()
            .filter(|p| !matches!(p.start, Placement::Fixed(_)))
            .count();
        let pool = self.depot_cells().len();
        if random_starts > 0 && pool < self.passengers.len() {
            return Err(Error::Instance(format!(
                "{} passengers need distinct starts but only {pool} candidate cells exist",
                self.passengers.len()
            )));
        }
        if pool < 2 && self.passengers.iter().any(|p| !matches!(p.dest, Placement::Fixed(_))) {
            return Err(Error::Instance("random destinations need at least two candidate cells".into()));
        }
        Ok(())
    }
}

fn parse_cell(s: &str) -> Option<Cell> {
    let digits = s.strip_prefix('l')?;
    let b = digits.as_bytes();
    if b.len() != 2 || !b.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some((b[0] - b'0', b[1] - b'0'))
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::Fixed(c) => f.write_str(&cell_name(*c)),
            Placement::AnyDepot => f.write_str("*"),
            Placement::AnyCell => f.write_str("?"),
        }
    }
}
