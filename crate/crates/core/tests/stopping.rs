mod common;

use std::collections::HashMap;

use common::*;
use dyadlab_core::carleson::{intensity, nu_sequence, IndexedSequence};
use dyadlab_core::dyadic::IntervalId;
use dyadlab_core::stopping::*;
use dyadlab_core::weights::Weight;

fn check_partition(st: &StoppingFamily, depth: u32) {
    let l = st.root;
    let mut covered = vec![0u32; 1 << depth];
    for k in st.intervals() {
        assert!(l.contains(k));
        assert!(k.level <= l.level + st.m);
        for x in k.leaf_range(depth) {
            covered[x] += 1;
        }
    }
    for x in l.leaf_range(depth) {
        assert_eq!(covered[x], 1, "leaf {x} under {l}");
    }
    assert_eq!(covered.iter().sum::<u32>() as usize, l.leaf_range(depth).len());
}

fn osc(u: &Weight, v: &Weight, k: IntervalId, d: u32) -> f64 {
    let rel = |w: &Weight| {
        let m = leaf_mean(w.leaves(), d, k);
        (leaf_mean(w.leaves(), d, k.right()) - leaf_mean(w.leaves(), d, k.left())).abs() / m
    };
    rel(u) + rel(v)
}

#[test]
fn families_partition_and_respect_criteria() {
    let d = 9;
    for seed in 0..12u64 {
        let w = cascade(d, [0.2, 0.5, 0.9, 0.99][seed as usize % 4], seed);
        let (u, v) = (w.clone(), w.inverse());
        for m in 0..=4 {
            let order = m + 2;
            for l in grid(d).up_to_level(d - m) {
                let st = build_stopping(&u, &v, l, m, order).unwrap();
                check_partition(&st, d);
                for member in &st.members {
                    let k = member.interval;
                    // a member either oscillates or sits at generation m
                    match member.criterion {
                        Criterion::Oscillation => assert!(osc(&u, &v, k, d) >= 1.0 / order as f64 - 1e-12),
                        Criterion::Depth => assert_eq!(k.level, l.level + m),
                    }
                    // ancestors strictly between k and l (and l itself) do not oscillate
                    let mut a = k.parent();
                    while let Some(anc) = a {
                        if !l.contains(anc) {
                            break;
                        }
                        assert!(osc(&u, &v, anc, d) < 1.0 / order as f64 + 1e-12, "{anc} above {k}");
                        a = anc.parent();
                    }
                    // averages stay within a factor e
                    for wt in [&u, &v] {
                        let ratio = leaf_mean(wt.leaves(), d, k) / leaf_mean(wt.leaves(), d, l);
                        assert!(ratio <= std::f64::consts::E && ratio >= (-1.0f64).exp(), "{ratio}");
                    }
                }
            }
        }
    }
}

#[test]
fn each_interval_is_claimed_by_at_most_m_plus_one_roots() {
    let d = 8;
    for seed in 0..6u64 {
        let w = cascade(d, 0.8, seed);
        let profile = OscillationProfile::new(&w, &w.inverse()).unwrap();
        for m in 0..=4 {
            let mut count: HashMap<IntervalId, u32> = HashMap::new();
            for l in grid(d).up_to_level(d - m) {
                for k in profile.build(l, m, m + 2).unwrap().intervals() {
                    assert!(k.level - l.level <= m);
                    *count.entry(k).or_default() += 1;
                }
            }
            assert!(count.values().all(|&c| c <= m + 1));
        }
    }
}

#[test]
fn lifted_intensity_within_m_plus_one() {
    let d = 10;
    for seed in 0..20u64 {
        let w = cascade(d, [0.5, 0.9, 0.99][seed as usize % 3], seed);
        let seq = nu_sequence(&w);
        let base = intensity(&seq, &w).unwrap().intensity;
        for m in 0..=4 {
            let lifted = lift_with_weights(&seq, &w, &w.inverse(), m, m + 2).unwrap();
            let got = intensity(&lifted, &w).unwrap().intensity;
            assert!(got <= (m + 1) as f64 * base * (1.0 + 1e-12), "seed {seed} m {m}");
        }
    }
}

#[test]
fn lift_with_flat_weights_sums_generation() {
    let d = 7;
    let mut r = rng(31);
    let seq = IndexedSequence::from_fn(grid(d), |_| rand::Rng::gen_range(&mut r, 0.0..1.0)).unwrap();
    let one = Weight::lebesgue(grid(d));
    for m in 0..=3 {
        let lifted = lift_with_weights(&seq, &one, &one, m, 5).unwrap();
        for l in grid(d).internal() {
            let expect: f64 = if l.level + m <= d {
                l.generation(m).map(|k| seq.get(k)).sum()
            } else {
                0.0
            };
            assert!((lifted.get(l) - expect).abs() < 1e-14);
        }
        let a = intensity(&seq, &one).unwrap().intensity;
        assert!(intensity(&lifted, &one).unwrap().intensity <= (m + 1) as f64 * a * (1.0 + 1e-12));
    }
}

#[test]
fn custom_partitions_also_lift() {
    // any partition into pieces at most m generations down works
    let d = 8;
    let w = cascade(d, 0.9, 77);
    let seq = nu_sequence(&w);
    let base = intensity(&seq, &w).unwrap().intensity;
    let m = 3;
    let lifted = lift_sequence(&seq, m, |l| {
        // left half whole, right half split all the way to generation m
        let mut members = vec![StoppingMember {
            interval: l.left(),
            criterion: Criterion::Oscillation,
        }];
        members.extend(l.right().generation(m - 1).map(|k| StoppingMember {
            interval: k,
            criterion: Criterion::Depth,
        }));
        Ok(StoppingFamily {
            root: l,
            m,
            threshold_order: 1,
            members,
        })
    })
    .unwrap();
    assert!(intensity(&lifted, &w).unwrap().intensity <= (m + 1) as f64 * base * (1.0 + 1e-12));
}
