use std::cmp::Ordering;

use super::CvReport;

/// Anything carrying a mean F1, its spread and a config label.
pub trait Scored {
    fn mean_f1(&self) -> f64;
    fn std_f1(&self) -> f64;
    fn descriptor(&self) -> &str;
}

impl Scored for CvReport {
    fn mean_f1(&self) -> f64 {
        self.f1.mean
    }
    fn std_f1(&self) -> f64 {
        self.f1.std
    }
    fn descriptor(&self) -> &str {
        &self.descriptor
    }
}

/// A bare `(label, mean F1, std F1)` row, e.g. one printed table line.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub descriptor: String,
    pub mean_f1: f64,
    pub std_f1: f64,
}

impl ScoreRow {
    pub fn new(descriptor: impl Into<String>, mean_f1: f64, std_f1: f64) -> Self {
        ScoreRow {
            descriptor: descriptor.into(),
            mean_f1,
            std_f1,
        }
    }
}

impl Scored for ScoreRow {
    fn mean_f1(&self) -> f64 {
        self.mean_f1
    }
    fn std_f1(&self) -> f64 {
        self.std_f1
    }
    fn descriptor(&self) -> &str {
        &self.descriptor
    }
}

pub fn pessimistic_score<T: Scored + ?Sized>(r: &T) -> f64 {
    r.mean_f1() - r.std_f1()
}

/// Maximizes mean F1 minus one std; ties go to the higher mean, then the
/// lexicographically smaller descriptor. `None` only for empty input.
pub fn select_pessimistic<T: Scored>(reports: &[T]) -> Option<&T> {
    reports.iter().min_by(|a, b| {
        pessimistic_score(*b)
            .total_cmp(&pessimistic_score(*a))
            .then_with(|| b.mean_f1().total_cmp(&a.mean_f1()))
            .then_with(|| a.descriptor().cmp(b.descriptor()))
            .then(Ordering::Equal)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties() {
        let rows = [
            ScoreRow::new("b", 0.8, 0.1),
            ScoreRow::new("a", 0.75, 0.05),
            ScoreRow::new("c", 0.8, 0.1),
        ];
        assert_eq!(select_pessimistic(&rows).unwrap().descriptor, "b");
        let rows = [ScoreRow::new("z", 0.5, 0.0), ScoreRow::new("y", 0.5, 0.0)];
        assert_eq!(select_pessimistic(&rows).unwrap().descriptor, "y");
        assert!(select_pessimistic::<ScoreRow>(&[]).is_none());
        let one = [ScoreRow::new("only", 0.1, 0.9)];
        assert_eq!(select_pessimistic(&one).unwrap(), &one[0]);
    }

    proptest! {
        #[test]
        fn never_strictly_dominated(rows in proptest::collection::vec((0.0f64..1.0, 0.0f64..0.2), 1..12)) {
            let rows: Vec<ScoreRow> = rows.iter().enumerate().map(|(i, &(m, s))| ScoreRow::new(format!("r{i:02}"), m, s)).collect();
            let pick = select_pessimistic(&rows).unwrap();
            for r in &rows {
                prop_assert!(!(r.mean_f1 > pick.mean_f1 && r.std_f1 < pick.std_f1));
            }
        }
    }
}
