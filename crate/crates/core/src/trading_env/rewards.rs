use super::{EnvError, Position, Result};

fn check_price(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(EnvError::NonPositivePrice(p))
    }
}

/// `±ln(p_curr / p_prev)`, positive for a long that rose or a short that fell.
pub fn reward_immediate(position: Position, p_prev: f64, p_curr: f64) -> Result<f64> {
    check_price(p_prev)?;
    check_price(p_curr)?;
    Ok(position.sign() * (p_curr / p_prev).ln())
}

/// Log return realized when `closed` is closed at `p_curr` after entry at `p_last_flip`;
/// 0 when nothing flipped.
pub fn reward_on_flip(
    flipped: bool,
    closed: Position,
    p_last_flip: f64,
    p_curr: f64,
) -> Result<f64> {
    check_price(p_last_flip)?;
    check_price(p_curr)?;
    if !flipped {
        return Ok(0.0);
    }
    Ok(closed.sign() * (p_curr / p_last_flip).ln())
}

/// `ln(final / initial)` on the terminal step, 0 before it.
pub fn reward_terminal(done: bool, equity_initial: f64, equity_final: f64) -> Result<f64> {
    for e in [equity_initial, equity_final] {
        if !(e > 0.0) {
            return Err(EnvError::NonPositiveEquity(e));
        }
    }
    Ok(if done {
        (equity_final / equity_initial).ln()
    } else {
        0.0
    })
}
