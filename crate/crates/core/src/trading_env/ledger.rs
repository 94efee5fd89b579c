use std::io::{Read, Write};

use super::{Action, EnvError, Position, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRecord {
    /// Bar index reached by this step.
    pub step: usize,
    pub action: Action,
    /// Position held over the bar that ends at `step`.
    pub position: Position,
    /// Close at `step`.
    pub price: f64,
    pub reward: f64,
    pub equity: f64,
    pub trade_executed: bool,
}

/// Every step of one episode, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLedger {
    pub start_index: usize,
    pub start_price: f64,
    pub initial_cash: f64,
    pub records: Vec<LedgerRecord>,
}

const HEADER: [&str; 6] = ["step", "action", "position", "price", "reward", "equity"];

impl EpisodeLedger {
    pub fn new(start_index: usize, start_price: f64, initial_cash: f64) -> Self {
        Self {
            start_index,
            start_price,
            initial_cash,
            records: Vec::new(),
        }
    }

    pub fn final_equity(&self) -> f64 {
        self.records.last().map_or(self.initial_cash, |r| r.equity)
    }

    /// Equity before the first step followed by equity after each step.
    pub fn equity_curve(&self) -> Vec<f64> {
        std::iter::once(self.initial_cash)
            .chain(self.records.iter().map(|r| r.equity))
            .collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }

    /// CSV `step,action,position,price,reward,equity`. The first row is the reset state,
    /// with action `reset`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(HEADER)?;
        w.write_record([
            self.start_index.to_string(),
            "reset".into(),
            Position::Short.as_str().into(),
            self.start_price.to_string(),
            "0".into(),
            self.initial_cash.to_string(),
        ])?;
        for r in &self.records {
            w.write_record([
                r.step.to_string(),
                r.action.as_str().into(),
                r.position.as_str().into(),
                r.price.to_string(),
                r.reward.to_string(),
                r.equity.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != HEADER {
            return Err(EnvError::BadLedger {
                line: 1,
                reason: format!("unexpected header {}", header.join(",")),
            });
        }
        let mut ledger: Option<EpisodeLedger> = None;
        let mut prev_position = Position::Short;
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec?;
            let bad = |reason: &str| EnvError::BadLedger {
                line,
                reason: reason.to_string(),
            };
            let num = |idx: usize| -> Result<f64> {
                rec[idx].parse::<f64>().map_err(|_| bad("not a number"))
            };
            let step: usize = rec[0].parse().map_err(|_| bad("bad step"))?;
            let position = match &rec[2] {
                "short" => Position::Short,
                "long" => Position::Long,
                _ => return Err(bad("bad position")),
            };
            match (&mut ledger, &rec[1]) {
                (None, "reset") => {
                    ledger = Some(EpisodeLedger::new(step, num(3)?, num(5)?));
                }
                (Some(l), a) => {
                    let action = match a {
                        "sell" => Action::Sell,
                        "buy" => Action::Buy,
                        _ => return Err(bad("bad action")),
                    };
                    l.records.push(LedgerRecord {
                        step,
                        action,
                        position,
                        price: num(3)?,
                        reward: num(4)?,
                        equity: num(5)?,
                        trade_executed: position != prev_position,
                    });
                }
                (None, _) => return Err(bad("first row must be the reset row")),
            }
            prev_position = position;
        }
        ledger.ok_or(EnvError::BadLedger {
            line: 2,
            reason: "empty ledger".into(),
        })
    }
}
