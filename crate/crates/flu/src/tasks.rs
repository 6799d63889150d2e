//! Rolling-origin task generation and the sequential yearly splits.

use crate::error::{Error, Result};
use crate::ili::{epiweek_year, IliSeries};

pub const DEFAULT_HORIZON: usize = 10;

/// The searched history-window lengths.
pub const WINDOW_SEARCH_SPACE: [usize; 7] = [105, 110, 115, 120, 125, 130, 135];

/// One rolling-origin forecast task over series indices. The model sees
/// `history()` and is scored on `targets()`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForecastTask {
    /// Index of the last observed week.
    pub origin: usize,
    pub window: usize,
    pub horizon: usize,
}

impl ForecastTask {
    pub fn history(&self) -> std::ops::Range<usize> {
        self.origin + 1 - self.window..self.origin + 1
    }

    pub fn targets(&self) -> std::ops::Range<usize> {
        self.origin + 1..self.origin + 1 + self.horizon
    }

    /// Structural anti-leak check: every visible index is at or before
    /// the origin, every scored index after it.
    pub fn leak_free(&self) -> bool {
        self.history().end == self.origin + 1
            && self.history().start <= self.origin
            && self.targets().start == self.origin + 1
    }
}

/// Every task whose full window and horizon fit, origin advancing one
/// week at a time.
pub fn rolling_tasks(series_len: usize, window: usize, horizon: usize) -> Result<Vec<ForecastTask>> {
    if window == 0 || horizon == 0 {
        return Err(Error::InvalidArg("window and horizon must be positive".into()));
    }
    if series_len < window + horizon {
        return Err(Error::SeriesTooShort {
            got: series_len,
            need: window + horizon,
        });
    }
    Ok((window - 1..series_len - horizon)
        .map(|origin| ForecastTask {
            origin,
            window,
            horizon,
        })
        .collect())
}

/// Tasks whose first forecast week lands in `year`: exactly 52 per year
/// when the series has enough surrounding data.
pub fn tasks_for_year(
    series: &IliSeries,
    window: usize,
    horizon: usize,
    year: i32,
) -> Result<Vec<ForecastTask>> {
    let all = rolling_tasks(series.len(), window, horizon)?;
    Ok(all
        .into_iter()
        .filter(|t| {
            let first_target = t.targets().start;
            epiweek_year(series.records[first_target].epiweek) == year
        })
        .collect())
}

/// One train/validation pair of the sequential protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SequentialSplit {
    pub train_year_start: i32,
    pub train_year_end: i32,
    pub val_year: i32,
}

/// Four splits: train 2010..=2015 validating 2016, then the training
/// span grows by one year through validating 2019.
pub fn sequential_splits(series: &IliSeries) -> Result<Vec<SequentialSplit>> {
    let first = epiweek_year(series.records[0].epiweek);
    let last = epiweek_year(series.records[series.len() - 1].epiweek);
    if last - first + 1 < 7 {
        return Err(Error::SeriesTooShort {
            got: (last - first + 1) as usize,
            need: 7,
        });
    }
    if last >= 2020 {
        return Err(Error::InvalidArg(
            "series contains data from 2020 or later; truncate it first".into(),
        ));
    }
    let splits: Vec<SequentialSplit> = (2016..=2019)
        .map(|val_year| SequentialSplit {
            train_year_start: first,
            train_year_end: val_year - 1,
            val_year,
        })
        .collect();
    for s in &splits {
        if s.val_year > last || s.train_year_start < first {
            return Err(Error::InvalidArg(format!(
                "series {first}..={last} does not cover validation year {}",
                s.val_year
            )));
        }
    }
    Ok(splits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ili::{generate_synthetic_ili, SynthIliSpec};

    fn series() -> IliSeries {
        generate_synthetic_ili(&SynthIliSpec::default()).unwrap()
    }

    #[test]
    fn one_validation_year_yields_exactly_52_tasks() {
        let s = series();
        let tasks = tasks_for_year(&s, 105, 10, 2016).unwrap();
        assert_eq!(tasks.len(), 52);
        for t in &tasks {
            assert_eq!(t.targets().len(), 10);
            assert!(t.leak_free());
        }
    }

    #[test]
    fn consecutive_tasks_overlap_in_nine_target_weeks() {
        let s = series();
        let tasks = tasks_for_year(&s, 105, 10, 2017).unwrap();
        for pair in tasks.windows(2) {
            assert_eq!(pair[1].origin, pair[0].origin + 1);
            let a = pair[0].targets();
            let b = pair[1].targets();
            let overlap = a.end.saturating_sub(b.start);
            assert_eq!(overlap, 9);
        }
    }

    #[test]
    fn minimal_series_produces_one_task() {
        let tasks = rolling_tasks(105 + 10, 105, 10).unwrap();
        assert_eq!(tasks.len(), 1);
        assert_eq!(tasks[0].origin, 104);
    }

    #[test]
    fn too_short_series_is_rejected() {
        assert!(matches!(
            rolling_tasks(100, 105, 10),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn splits_follow_the_published_protocol() {
        let s = series();
        let splits = sequential_splits(&s).unwrap();
        assert_eq!(splits.len(), 4);
        assert_eq!(
            splits.iter().map(|s| s.val_year).collect::<Vec<_>>(),
            vec![2016, 2017, 2018, 2019]
        );
        assert_eq!(splits[0].train_year_end, 2015);
        assert_eq!(splits[3].train_year_end, 2018);
        for s in &splits {
            assert!(s.train_year_end < s.val_year);
        }
    }

    #[test]
    fn post_2020_data_must_be_excluded_first() {
        let mut s = generate_synthetic_ili(&SynthIliSpec {
            year_start: 2010,
            year_end: 2021,
            ..Default::default()
        })
        .unwrap();
        assert!(sequential_splits(&s).is_err());
        s.truncate_before(2020);
        assert!(sequential_splits(&s).is_ok());
    }

    #[test]
    fn window_search_space_is_pinned() {
        assert_eq!(WINDOW_SEARCH_SPACE, [105, 110, 115, 120, 125, 130, 135]);
    }
}
