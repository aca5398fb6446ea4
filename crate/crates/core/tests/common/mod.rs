#![allow(dead_code)]

use ansgrade::corpus::{Dataset, LabeledResponse, Split, Task};
use ansgrade::linalg::DenseMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

/// `(row label, precision, recall, f1)` with each metric as `(mean, std)`.
pub type TableRow = (&'static str, (f64, f64), (f64, f64), (f64, f64));

pub const TABLE_A: [TableRow; 8] = [
    ("1-gram+RF", (0.845, 0.057), (0.921, 0.037), (0.881, 0.035)),
    ("1-gram+logreg", (0.857, 0.074), (0.869, 0.067), (0.862, 0.065)),
    ("1-gram+SVD+RF", (0.794, 0.025), (0.984, 0.014), (0.879, 0.014)),
    ("1-gram+SVD+logreg", (0.859, 0.069), (0.874, 0.047), (0.866, 0.053)),
    ("TF-IDF+RF", (0.847, 0.054), (0.942, 0.039), (0.891, 0.036)),
    ("TF-IDF+logreg", (0.748, 0.019), (0.979, 0.034), (0.848, 0.022)),
    ("TF-IDF+SVD+RF", (0.772, 0.025), (0.990, 0.014), (0.867, 0.014)),
    ("TF-IDF+SVD+logreg", (0.751, 0.025), (0.979, 0.034), (0.850, 0.025)),
];

pub const TABLE_B: [TableRow; 8] = [
    ("1-gram+RF", (0.731, 0.066), (0.744, 0.054), (0.736, 0.047)),
    ("1-gram+logreg", (0.735, 0.046), (0.727, 0.080), (0.730, 0.059)),
    ("1-gram+SVD+RF", (0.686, 0.035), (0.762, 0.046), (0.721, 0.032)),
    ("1-gram+SVD+logreg", (0.722, 0.067), (0.726, 0.089), (0.723, 0.074)),
    ("TF-IDF+RF", (0.709, 0.036), (0.750, 0.049), (0.728, 0.034)),
    ("TF-IDF+logreg", (0.725, 0.035), (0.810, 0.060), (0.764, 0.035)),
    ("TF-IDF+SVD+RF", (0.637, 0.026), (0.834, 0.061), (0.721, 0.036)),
    ("TF-IDF+SVD+logreg", (0.705, 0.023), (0.809, 0.063), (0.753, 0.036)),
];

/// Training-set class counts of task A.
pub const TASK_A_POSITIVES: usize = 191;
pub const TASK_A_NEGATIVES: usize = 77;

/// Singular values of `a`, descending, by one-sided Jacobi rotations.
pub fn jacobi_singular_values(a: &DenseMatrix) -> Vec<f64> {
    let a = if a.rows() < a.cols() { a.transpose() } else { a.clone() };
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|v| v * v).sum();
                let beta: f64 = cols[q].iter().map(|v| v * v).sum();
                let gamma: f64 = (0..m).map(|i| cols[p][i] * cols[q][i]).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (cols[p][i], cols[q][i]);
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

const TOPIC_POS: &[&str] = &[
    "imun",
    "antibodi",
    "virus",
    "kuman",
    "sel",
    "darah",
    "putih",
    "melawan",
    "infeksi",
    "bakteri",
    "vaksin",
    "kekebalan",
    "penyakit",
    "patogen",
    "limfosit",
    "tubuh",
    "sehat",
    "protein",
    "serum",
    "respons",
];
const TOPIC_NEG: &[&str] = &[
    "hujan", "banjir", "sungai", "air", "rumah", "jalan", "panas", "angin", "pohon", "tanah", "laut", "awan", "gunung",
    "kota", "desa", "sampah", "got", "musim", "cuaca", "debu",
];
const SHARED: &[&str] = &[
    "yang", "dan", "itu", "adalah", "karena", "dengan", "ada", "untuk", "jadi", "bisa",
];

/// Two-class corpus with disjoint topic vocabularies, shared filler words and
/// `noise` of the labels flipped. Every text opens with a topic word.
pub fn synthetic_corpus(n_pos: usize, n_neg: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = ansgrade::seed::rng(seed);
    let n = n_pos + n_neg;
    let mut truth: Vec<u8> = (0..n).map(|i| u8::from(i < n_pos)).collect();
    truth.shuffle(&mut rng);
    let mut labels = truth.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_flip = (noise * n as f64).round() as usize;
    for &i in &order[..n_flip] {
        labels[i] = 1 - labels[i];
    }
    let responses = (0..n)
        .map(|i| {
            let topic = if truth[i] == 1 { TOPIC_POS } else { TOPIC_NEG };
            let len = rng.random_range(5..12);
            let words: Vec<&str> = (0..len)
                .map(|j| {
                    if j > 0 && rng.random_bool(0.3) {
                        SHARED[rng.random_range(0..SHARED.len())]
                    } else {
                        topic[rng.random_range(0..topic.len())]
                    }
                })
                .collect();
            LabeledResponse {
                id: format!("r{i:04}"),
                text: words.join(" "),
                label: Some(labels[i]),
            }
        })
        .collect();
    Dataset::new(Task::A, Split::Train, responses).unwrap()
}

/// Random texts over both topic vocabularies plus unseen words.
pub fn random_texts(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ansgrade::seed::rng(seed);
    let pool: Vec<&str> = TOPIC_POS.iter().chain(TOPIC_NEG).chain(SHARED).copied().collect();
    (0..n)
        .map(|i| {
            let len = rng.random_range(1..10);
            let mut words: Vec<String> = (0..len)
                .map(|_| pool[rng.random_range(0..pool.len())].to_string())
                .collect();
            if i % 7 == 0 {
                words.push(format!("asing{i}"));
            }
            words.join(" ")
        })
        .collect()
}
