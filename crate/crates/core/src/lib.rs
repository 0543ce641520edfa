//! Boolean choice-network construction over And-Inverter Graphs.

pub mod aig;
pub mod choice;
pub mod cone;
pub mod flow;
pub mod gen;
pub mod mapper;
pub mod mutate;
pub mod rank;
pub mod rng;
pub mod verify;

/// Optimization objective shared by selection, ranking and mapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Delay,
    Area,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Delay => "delay",
            Mode::Area => "area",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delay" => Ok(Mode::Delay),
            "area" => Ok(Mode::Area),
            other => Err(format!("unknown mode `{other}` (expected delay or area)")),
        }
    }
}
