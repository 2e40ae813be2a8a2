use serde::{Deserialize, Serialize};

use super::EventKind;
use crate::market_data::BarSeries;

/// An event before characterization: kind and the close indices it spans.
/// Its constituent returns are `returns[k_start..k_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpan {
    pub kind: EventKind,
    pub k_start: usize,
    pub k_end: usize,
}

impl EventSpan {
    pub fn bars(&self) -> usize {
        self.k_end - self.k_start
    }
}

/// Split one day's log-returns into alternating epsilon-drawdowns and drawups.
///
/// Leading zero returns are skipped and the first nonzero return sets the
/// polarity. From each start the cumulative log-price is tracked together
/// with its running extremum (minimum for a drawdown, maximum for a drawup).
/// Once the price moves away from that extremum by strictly more than
/// `epsilon`, the event ends at the first bar reaching the extremum and the
/// opposite event starts there. An event still open when the day runs out
/// is dropped.
pub fn detect_spans(returns: &[f64], epsilon: f64) -> Vec<EventSpan> {
    let Some(mut start) = returns.iter().position(|r| *r != 0.0) else {
        return Vec::new();
    };
    let mut kind = if returns[start] < 0.0 {
        EventKind::Drawdown
    } else {
        EventKind::Drawup
    };
    let mut spans = Vec::new();

    loop {
        let mut cum = 0.0;
        let mut extremum = 0.0;
        let mut extremum_at = start;
        let mut terminated = false;
        for (k, r) in returns.iter().enumerate().skip(start) {
            cum += r;
            let deviation = match kind {
                EventKind::Drawdown => {
                    if cum < extremum {
                        extremum = cum;
                        extremum_at = k + 1;
                    }
                    cum - extremum
                }
                EventKind::Drawup => {
                    if cum > extremum {
                        extremum = cum;
                        extremum_at = k + 1;
                    }
                    extremum - cum
                }
            };
            if deviation > epsilon {
                terminated = true;
                break;
            }
        }
        if !terminated {
            break;
        }
        debug_assert!(extremum_at > start);
        spans.push(EventSpan {
            kind,
            k_start: start,
            k_end: extremum_at,
        });
        start = extremum_at;
        kind = kind.opposite();
    }
    spans
}

/// [`detect_spans`] over a day's bar returns.
pub fn detect_events(bars: &BarSeries, epsilon: f64) -> Vec<EventSpan> {
    detect_spans(&bars.returns, epsilon)
}
