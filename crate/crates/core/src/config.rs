use crate::Exec;

/// Resource caps and execution mode shared by the heavy operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    /// Largest number of vertices any single digraph may materialize.
    pub materialization_cap: usize,
    /// Largest subpower closure.
    pub closure_cap: usize,
    pub exec: Exec,
}

impl Config {
    pub const DEFAULT_MATERIALIZATION_CAP: usize = 200_000;
    pub const DEFAULT_CLOSURE_CAP: usize = 5_000_000;

    pub fn with_exec(self, exec: Exec) -> Self {
        Config { exec, ..self }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            materialization_cap: Self::DEFAULT_MATERIALIZATION_CAP,
            closure_cap: Self::DEFAULT_CLOSURE_CAP,
            exec: Exec::default(),
        }
    }
}
