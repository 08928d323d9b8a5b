use std::collections::BTreeMap;

use lexdiv::embed::{Embedding, EmbeddingParams};
use lexdiv::linalg::{random_orthogonal, Mat};
use lexdiv::topics::{
    cluster, dbscan, doc_vector, evaluate, fit_lda, keywords_tsv, project_2d, DocVector, IdfTable,
};
use lexdiv::Side;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn toy_embedding() -> Embedding {
    let words = vec!["up".to_string(), "down".to_string(), "side".to_string()];
    let vecs = vec![1.0, 2.0, 0.0, -1.0, -2.0, 0.0, 0.0, 0.0, 3.0];
    Embedding::from_parts(words, vec![5, 5, 5], 3, vecs, BTreeMap::new(), EmbeddingParams::default())
}

#[test]
fn doc_vector_examples() {
    let e = toy_embedding();
    let docs = vec![vec!["up", "down"], vec!["up", "down"], vec!["side"]];
    let idf = IdfTable::build(&docs);
    let single = doc_vector("1", &["side"], Side::Left, &e, &idf);
    assert!(!single.degenerate);
    assert_eq!(single.vector, vec![0.0, 0.0, 1.0]);

    let cancel = doc_vector("2", &["up", "down"], Side::Left, &e, &idf);
    assert!(cancel.degenerate);

    let once = doc_vector("3", &["up", "side"], Side::Right, &e, &idf);
    let twice = doc_vector("3", &["up", "side", "up", "side"], Side::Right, &e, &idf);
    for (a, b) in once.vector.iter().zip(&twice.vector) {
        assert!((a - b).abs() < 1e-12);
    }
    let oov = doc_vector("4", &["nothing"], Side::Left, &e, &idf);
    assert!(oov.degenerate);
    let empty: [&str; 0] = [];
    assert!(doc_vector("5", &empty, Side::Left, &e, &idf).degenerate);
}

fn gaussian_blob(center: &[f64], n: usize, sd: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| center.iter().map(|c| c + sd * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

#[test]
fn separated_blobs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut pts = gaussian_blob(&[0.0, 0.0, 0.0], 20, 0.05, &mut rng);
    pts.extend(gaussian_blob(&[5.0, 0.0, 0.0], 20, 0.05, &mut rng));
    let max_intra = pts[..20]
        .iter()
        .flat_map(|a| pts[..20].iter().map(move |b| dist(a, b)))
        .fold(0.0, f64::max);
    let min_inter = pts[..20]
        .iter()
        .flat_map(|a| pts[20..].iter().map(move |b| dist(a, b)))
        .fold(f64::INFINITY, f64::min);
    let eps = (max_intra + min_inter) / 2.0;
    let l = dbscan(&pts, eps, 4);
    assert!(l[..20].iter().all(|&x| x == Some(0)));
    assert!(l[20..].iter().all(|&x| x == Some(1)));
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Pairs placed in the same cluster, as a relabeling-invariant signature.
fn co_membership(labels: &[Option<usize>]) -> Vec<bool> {
    let mut out = Vec::new();
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            out.push(labels[i].is_some() && labels[i] == labels[j]);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn clustering_invariant_to_input_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = gaussian_blob(&[0.0, 0.0], 15, 0.05, &mut rng);
        pts.extend(gaussian_blob(&[3.0, 3.0], 15, 0.05, &mut rng));
        pts.push(vec![50.0, -50.0]);
        let base = dbscan(&pts, 1.0, 3);
        let mut perm: Vec<usize> = (0..pts.len()).collect();
        perm.shuffle(&mut rng);
        let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
        let got = dbscan(&shuffled, 1.0, 3);
        let mut back = vec![None; pts.len()];
        for (k, &i) in perm.iter().enumerate() {
            back[i] = got[k];
        }
        prop_assert_eq!(co_membership(&base), co_membership(&back));
    }
}

#[test]
fn cluster_model_keywords_and_red_share() {
    let mut docs = Vec::new();
    let mut tokens = BTreeMap::new();
    for i in 0..10 {
        let id = format!("{i:02}");
        let (v, side, toks) = if i < 5 {
            (vec![1.0, 0.0], Side::Left, vec!["soup", "bread"])
        } else {
            (vec![0.0, 1.0], Side::Right, vec!["vote", "bread"])
        };
        docs.push(DocVector { tweet_id: id.clone(), vector: v, side, degenerate: false });
        tokens.insert(id, toks);
    }
    let m = cluster(&docs, &tokens, 0.1, 3, 2);
    assert_eq!(m.keywords.len(), 2);
    assert_eq!(m.keywords[&0][0].term, "soup");
    assert_eq!(m.keywords[&1][0].term, "vote");
    assert_eq!(m.red_share[&0], 0.0);
    assert_eq!(m.red_share[&1], 1.0);
    assert!(keywords_tsv(&m).starts_with("cluster\trank\tterm\tscore\tred_share\n0\t1\tsoup\t"));
}

#[test]
fn projection_distances_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = 6;
    let scales = [5.0, 3.0, 1.0, 0.5, 0.2, 0.1];
    let pts: Vec<Vec<f64>> = (0..40)
        .map(|_| scales.iter().map(|s| s * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let r = random_orthogonal(d, &mut rng);
    let rotated: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| Mat::from_rows(&[p.clone()]).matmul(&r).row(0).to_vec())
        .collect();
    let a = project_2d(&pts).unwrap();
    let b = project_2d(&rotated).unwrap();
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let da = dist(&a.coords[i], &a.coords[j]);
            let db = dist(&b.coords[i], &b.coords[j]);
            assert!((da - db).abs() < 1e-6);
        }
    }
}

#[test]
fn top_components_beat_random_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = 5;
    let pts: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..d).map(|k| (k as f64 + 1.0) * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let p = project_2d(&pts).unwrap();
    let best = p.explained_variance[0] + p.explained_variance[1];
    let mean: Vec<f64> = (0..d).map(|k| pts.iter().map(|v| v[k]).sum::<f64>() / 60.0).collect();
    for _ in 0..1000 {
        let q = random_orthogonal(d, &mut rng);
        let mut var = 0.0;
        for c in 0..2 {
            let axis = q.col(c);
            let proj: Vec<f64> = pts
                .iter()
                .map(|v| v.iter().zip(&mean).zip(&axis).map(|((x, m), a)| (x - m) * a).sum())
                .collect();
            var += proj.iter().map(|x| x * x).sum::<f64>() / 59.0;
        }
        assert!(var <= best + 1e-9);
    }
}

fn two_class(n: usize, sep: f64, d: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<Side>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let side = if i % 2 == 0 { Side::Left } else { Side::Right };
        let shift = if side == Side::Right { sep } else { 0.0 };
        x.push((0..d).map(|k| if k == 0 { shift } else { 0.0 } + rng.sample::<f64, _>(StandardNormal)).collect());
        y.push(side);
    }
    (x, y)
}

#[test]
fn well_separated_classes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (x, y) = two_class(500, 10.0, 5, &mut rng);
    let e = evaluate(&x, &y, 20, 1, None).unwrap();
    assert!(e.accuracy > 0.99);
}

#[test]
fn shuffled_labels_at_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // cross-validated accuracy on one shuffled dataset has sd ≈ 0.5/√n
    let (x, mut y) = two_class(4000, 0.0, 10, &mut rng);
    y.shuffle(&mut rng);
    let e = evaluate(&x, &y, 100, 2, None).unwrap();
    assert!((e.accuracy - 0.5).abs() <= 0.03, "accuracy {}", e.accuracy);
    assert!(e.kappa.abs() <= 0.05);
    for s in &e.splits {
        assert_eq!(s.kappa, (s.accuracy - s.p_chance) / (1.0 - s.p_chance));
    }
    let again = evaluate(&x, &y, 100, 2, None).unwrap();
    assert_eq!(e, again);
}

#[test]
fn lda_decisions_survive_affine_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (x, y) = two_class(200, 1.0, 4, &mut rng);
    let m = fit_lda(&x, &y, None).unwrap();
    let scaled: Vec<Vec<f64>> = x.iter().map(|v| v.iter().map(|a| 3.5 * a - 2.0).collect()).collect();
    let ms = fit_lda(&scaled, &y, None).unwrap();
    for (v, s) in x.iter().zip(&scaled) {
        if m.score(v).abs() > 1e-6 {
            assert_eq!(m.predict(v), ms.predict(s));
        }
    }
}

