//! A chain of 3-D grid cubes joined by one-way doors.
//!
//! Movement: `left`/`right` change `w`, `down`/`up` change `b`,
//! `above`/`below` change the depth `d`. Moves that would leave the cube are
//! no-ops. `into` on a door cell jumps to the next cube's origin, anywhere
//! else it is a no-op. `reset_depth` returns to depth zero.

mod heatmap;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ActionKey, Environment, StateKey, Transition};
use crate::predicate::{parse_call, Predicate};

pub use heatmap::{
    depth_grid, read_visits_csv, top_view, write_heatmaps, write_visits_csv, HeatmapFiles,
};

pub const ACTIONS: [&str; 8] = [
    "up",
    "down",
    "left",
    "right",
    "above",
    "below",
    "into",
    "reset_depth",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeState {
    pub g: usize,
    pub w: usize,
    pub b: usize,
    pub d: usize,
}

impl CubeState {
    pub const ORIGIN: Self = Self {
        g: 0,
        w: 0,
        b: 0,
        d: 0,
    };
}

/// Door at `(g, w, b)` for every depth, leading to the origin of cube `g + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Door {
    pub g: usize,
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Abstraction {
    #[default]
    Full,
    /// Ignore the depth coordinate.
    DepthErased,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CubeConfig {
    pub cubes: usize,
    pub width: usize,
    pub breadth: usize,
    pub depth: usize,
    /// `None` places one door at the center column of every cube but the last.
    pub doors: Option<Vec<Door>>,
    pub abstraction: Abstraction,
}

impl Default for CubeConfig {
    fn default() -> Self {
        Self {
            cubes: 6,
            width: 10,
            breadth: 10,
            depth: 6,
            doors: None,
            abstraction: Abstraction::Full,
        }
    }
}

impl CubeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cubes == 0 || self.width == 0 || self.breadth == 0 || self.depth == 0 {
            return Err(Error::Config("cube dimensions must be positive".into()));
        }
        for door in self.doors() {
            if door.g + 1 >= self.cubes || door.w >= self.width || door.b >= self.breadth {
                return Err(Error::Config(format!(
                    "door ({}, {}, {}) is outside the world or in the last cube",
                    door.g, door.w, door.b
                )));
            }
        }
        Ok(())
    }

    pub fn doors(&self) -> Vec<Door> {
        match &self.doors {
            Some(d) => d.clone(),
            None => (0..self.cubes.saturating_sub(1))
                .map(|g| Door {
                    g,
                    w: self.width / 2,
                    b: self.breadth / 2,
                })
                .collect(),
        }
    }

    pub fn cells(&self) -> usize {
        self.cubes * self.width * self.breadth * self.depth
    }

    pub fn cells_per_cube(&self) -> usize {
        self.width * self.breadth * self.depth
    }

    pub fn index(&self, s: CubeState) -> usize {
        ((s.g * self.width + s.w) * self.breadth + s.b) * self.depth + s.d
    }

    pub fn state_at(&self, index: usize) -> CubeState {
        let d = index % self.depth;
        let rest = index / self.depth;
        let b = rest % self.breadth;
        let rest = rest / self.breadth;
        CubeState {
            g: rest / self.width,
            w: rest % self.width,
            b,
            d,
        }
    }

    pub fn is_door(&self, s: CubeState) -> bool {
        self.doors()
            .iter()
            .any(|door| door.g == s.g && door.w == s.w && door.b == s.b)
    }

    /// Total, deterministic transition function.
    pub fn step(&self, s: CubeState, action: &str) -> Option<CubeState> {
        let dec = |x: usize| x.saturating_sub(1);
        let inc = |x: usize, bound: usize| if x + 1 < bound { x + 1 } else { x };
        Some(match action {
            "left" => CubeState { w: dec(s.w), ..s },
            "right" => CubeState {
                w: inc(s.w, self.width),
                ..s
            },
            "down" => CubeState { b: dec(s.b), ..s },
            "up" => CubeState {
                b: inc(s.b, self.breadth),
                ..s
            },
            "above" => CubeState { d: dec(s.d), ..s },
            "below" => CubeState {
                d: inc(s.d, self.depth),
                ..s
            },
            "into" if self.is_door(s) => CubeState {
                g: s.g + 1,
                ..CubeState::ORIGIN
            },
            "into" => s,
            "reset_depth" => CubeState { d: 0, ..s },
            _ => return None,
        })
    }

    pub fn key(&self, s: CubeState) -> StateKey {
        match self.abstraction {
            Abstraction::Full => StateKey::from(format!("{},{},{},{}", s.g, s.w, s.b, s.d)),
            Abstraction::DepthErased => StateKey::from(format!("{},{},{}", s.g, s.w, s.b)),
        }
    }
}

/// The cube world as an [`Environment`]; counts concrete visits per cell.
#[derive(Debug, Clone)]
pub struct CubeEnv {
    config: CubeConfig,
    doors: Vec<bool>,
    keys: Vec<StateKey>,
    actions: Arc<[ActionKey]>,
    state: CubeState,
    visits: Vec<u64>,
}

impl CubeEnv {
    pub fn new(config: CubeConfig) -> Result<Self> {
        config.validate()?;
        let keys = (0..config.cells())
            .map(|i| config.key(config.state_at(i)))
            .collect();
        let mut doors = vec![false; config.cubes * config.width * config.breadth];
        for door in config.doors() {
            doors[(door.g * config.width + door.w) * config.breadth + door.b] = true;
        }
        let mut actions: Vec<ActionKey> = ACTIONS.iter().map(ActionKey::new).collect();
        actions.sort();
        Ok(Self {
            visits: vec![0; config.cells()],
            config,
            doors,
            keys,
            actions: actions.into(),
            state: CubeState::ORIGIN,
        })
    }

    pub fn config(&self) -> &CubeConfig {
        &self.config
    }

    pub fn state(&self) -> CubeState {
        self.state
    }

    /// Visits per cell, indexed by [`CubeConfig::index`], accumulated across
    /// episodes (initial states included).
    pub fn visits(&self) -> &[u64] {
        &self.visits
    }

    fn visit(&mut self) {
        self.visits[self.config.index(self.state)] += 1;
    }
}

impl Environment for CubeEnv {
    type Snapshot = CubeState;

    fn reset(&mut self) -> StateKey {
        self.state = CubeState::ORIGIN;
        self.visit();
        self.keys[self.config.index(self.state)].clone()
    }

    fn actions(&self) -> Vec<ActionKey> {
        self.actions.to_vec()
    }

    fn step(&mut self, action: &ActionKey) -> Result<Transition> {
        let c = &self.config;
        let s = self.state;
        let next = if action.as_str() == "into" {
            let col = (s.g * c.width + s.w) * c.breadth + s.b;
            if self.doors[col] {
                CubeState {
                    g: s.g + 1,
                    ..CubeState::ORIGIN
                }
            } else {
                s
            }
        } else {
            c.step(s, action.as_str())
                .ok_or_else(|| Error::DisabledAction {
                    state: format!("{s:?}"),
                    action: action.to_string(),
                })?
        };
        self.state = next;
        self.visit();
        Ok(Transition {
            state: self.keys[self.config.index(next)].clone(),
            reward: 0.0,
        })
    }

    fn snapshot(&self) -> &CubeState {
        &self.state
    }
}

/// `g >= i`.
pub fn cube_at_least(i: usize) -> Predicate<CubeState> {
    Predicate::new(format!("cubeAtLeast({i})"), move |s: &CubeState| s.g >= i)
}

/// Parses `cubeAtLeast(i)`.
pub fn parse_cube_predicate(text: &str) -> Result<Predicate<CubeState>> {
    let call = parse_call(text)?;
    match call.name.as_str() {
        "cubeAtLeast" => {
            call.expect_arity(1)?;
            let i = call.int_arg(0)?;
            let i = usize::try_from(i)
                .map_err(|_| Error::Predicate(format!("cubeAtLeast: {i} is negative")))?;
            Ok(cube_at_least(i))
        }
        other => Err(Error::Predicate(format!(
            "unknown predicate `{other}`; known: cubeAtLeast(i)"
        ))),
    }
}
