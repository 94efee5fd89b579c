use std::io::Write;

use super::Result;

/// One row per finished training episode.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    /// Env steps taken so far, including this episode's last one.
    pub timestep: usize,
    pub episode: usize,
    pub episode_return: f64,
    /// Mean training loss since the previous record; `None` before learning starts.
    pub loss: Option<f64>,
    /// Exploration rate at the end of the episode (DQN only).
    pub epsilon: Option<f64>,
    /// Reward sum of a greedy episode on the evaluation env.
    pub eval_return: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub records: Vec<LogRecord>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TrainingLog {
    pub fn push(&mut self, r: LogRecord) {
        debug_assert!(self.records.last().map_or(true, |l| l.timestep < r.timestep));
        self.records.push(r);
    }

    pub fn last(&self) -> Option<&LogRecord> {
        self.records.last()
    }

    /// CSV with header `timestep,episode,episode_return,loss,epsilon,eval_return`;
    /// missing values are empty cells.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["timestep", "episode", "episode_return", "loss", "epsilon", "eval_return"])?;
        for r in &self.records {
            w.write_record([
                r.timestep.to_string(),
                r.episode.to_string(),
                r.episode_return.to_string(),
                opt(r.loss),
                opt(r.epsilon),
                r.eval_return.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Running mean of losses between log records.
#[derive(Debug, Default)]
pub(crate) struct LossMeter {
    sum: f64,
    n: usize,
}

impl LossMeter {
    pub fn add(&mut self, loss: f64) {
        self.sum += loss;
        self.n += 1;
    }

    pub fn take(&mut self) -> Option<f64> {
        let out = (self.n > 0).then(|| self.sum / self.n as f64);
        *self = Self::default();
        out
    }
}
