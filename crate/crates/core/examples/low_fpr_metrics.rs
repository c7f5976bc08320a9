//! Why membership attacks are judged at low false-positive rates.
//!
//! The "bulk" attacker shifts every member's score a little and gets a
//! comfortable AUC. The "tail" attacker identifies a small slice of members
//! with near certainty and guesses randomly on the rest, which barely moves
//! AUC at all. Average-case metrics rank bulk far ahead; at 0.01% FPR the
//! ranking flips, and that is the regime where an accusation of membership
//! actually means something.
//!
//! ```sh
//! cargo run --example low_fpr_metrics
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use mia_audit::metrics::{auc, best_balanced_accuracy, confusion_at_threshold, roc_curve, tpr_at_fpr};

fn main() -> mia_audit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 10_000usize;
    let standard = Normal::new(0.0, 1.0).unwrap();

    // Half members, half non-members.
    let truth: Vec<bool> = (0..n).map(|i| i < n / 2).collect();

    // Bulk: members drawn from N(0.95, 1), a uniform small shift.
    let bulk: Vec<f64> = truth
        .iter()
        .map(|&m| standard.sample(&mut rng) + if m { 0.95 } else { 0.0 })
        .collect();

    // Tail: 4% of members are confidently identified, the rest look random.
    let tail: Vec<f64> = truth
        .iter()
        .map(|&m| {
            if m && rng.gen_bool(0.04) {
                20.0 + standard.sample(&mut rng)
            } else {
                standard.sample(&mut rng)
            }
        })
        .collect();

    println!("attacker      auc  bal_acc  tpr@1%fpr  tpr@0.1%fpr  tpr@0.01%fpr");
    for (name, scores) in [("bulk", &bulk), ("tail", &tail)] {
        let roc = roc_curve(scores, &truth)?;
        let (_threshold, bal_acc) = best_balanced_accuracy(&roc);
        println!(
            "{name:>8}  {:>7.3}  {:>7.3}  {:>9.4}  {:>11.4}  {:>12.4}",
            auc(&roc),
            bal_acc,
            tpr_at_fpr(&roc, 1e-2),
            tpr_at_fpr(&roc, 1e-3),
            tpr_at_fpr(&roc, 1e-4),
        );
    }
    println!("\nbulk looks stronger on auc yet its confident-sounding positives are");
    println!("mostly noise; tail names fewer members but is right about them.");

    // The same story at fixed thresholds on the tail attacker's scores.
    println!("\ntail attacker threshold sweep:");
    for threshold in [2.0, 5.0, 15.0] {
        let c = confusion_at_threshold(&tail, &truth, threshold)?;
        println!(
            "  threshold {threshold:>4.1}: tpr {:.4}, fpr {:.6}, balanced accuracy {:.3}",
            c.tpr(),
            1.0 - c.tnr(),
            c.balanced_accuracy(),
        );
    }
    Ok(())
}
