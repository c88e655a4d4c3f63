//! Edit-distance pairing of reference and hypothesis tokens.

use alloc::vec;
use alloc::vec::Vec;

/// Which aligned positions count as token pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PairsMode {
    MatchOnly,
    #[default]
    MatchAndSub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EditCounts {
    pub matches: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TokenPairing {
    /// `(ref_index, hyp_index)`, increasing in both coordinates.
    pub pairs: Vec<(usize, usize)>,
    pub edit_distance: usize,
    pub counts: EditCounts,
}

impl TokenPairing {
    /// Number of paired tokens `K`.
    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    /// Hypothesis partner of every reference position.
    pub fn ref_to_hyp(&self, ref_len: usize) -> Vec<Option<usize>> {
        let mut map = vec![None; ref_len];
        for &(r, h) in &self.pairs {
            if r < ref_len {
                map[r] = Some(h);
            }
        }
        map
    }

    /// Pairing with the roles of reference and hypothesis swapped.
    pub fn transposed(&self) -> TokenPairing {
        TokenPairing {
            pairs: self.pairs.iter().map(|&(r, h)| (h, r)).collect(),
            edit_distance: self.edit_distance,
            counts: EditCounts {
                insertions: self.counts.deletions,
                deletions: self.counts.insertions,
                ..self.counts
            },
        }
    }

    /// Pairing of two identical sequences of length `n`.
    pub fn identity(n: usize) -> TokenPairing {
        TokenPairing {
            pairs: (0..n).map(|i| (i, i)).collect(),
            edit_distance: 0,
            counts: EditCounts {
                matches: n,
                ..EditCounts::default()
            },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Match,
    Sub,
    Del,
    Ins,
}

/// Unit-cost Levenshtein alignment with match and substitution pairs.
pub fn align_tokens<T: PartialEq>(ref_labels: &[T], hyp_labels: &[T]) -> TokenPairing {
    align_tokens_with(ref_labels, hyp_labels, PairsMode::MatchAndSub)
}

/// Levenshtein alignment with a deterministic backtrace.
///
/// When several alignments are optimal the backtrace, walking from the end,
/// prefers match, then substitution, then deletion (reference token dropped),
/// then insertion.
pub fn align_tokens_with<T: PartialEq>(ref_labels: &[T], hyp_labels: &[T], mode: PairsMode) -> TokenPairing {
    let n = ref_labels.len();
    let m = hyp_labels.len();
    let width = m + 1;
    let mut dist = vec![0usize; (n + 1) * width];
    for i in 0..=n {
        dist[i * width] = i;
    }
    for (j, d) in dist.iter_mut().take(width).enumerate() {
        *d = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = dist[(i - 1) * width + j - 1] + usize::from(ref_labels[i - 1] != hyp_labels[j - 1]);
            let up = dist[(i - 1) * width + j] + 1;
            let left = dist[i * width + j - 1] + 1;
            dist[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut counts = EditCounts::default();
    let mut pairs = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dist[i * width + j];
        let step = if i > 0 && j > 0 && ref_labels[i - 1] == hyp_labels[j - 1] && dist[(i - 1) * width + j - 1] == here {
            Step::Match
        } else if i > 0 && j > 0 && dist[(i - 1) * width + j - 1] + 1 == here {
            Step::Sub
        } else if i > 0 && dist[(i - 1) * width + j] + 1 == here {
            Step::Del
        } else {
            Step::Ins
        };
        match step {
            Step::Match => {
                counts.matches += 1;
                pairs.push((i - 1, j - 1));
                i -= 1;
                j -= 1;
            }
            Step::Sub => {
                counts.substitutions += 1;
                if mode == PairsMode::MatchAndSub {
                    pairs.push((i - 1, j - 1));
                }
                i -= 1;
                j -= 1;
            }
            Step::Del => {
                counts.deletions += 1;
                i -= 1;
            }
            Step::Ins => {
                counts.insertions += 1;
                j -= 1;
            }
        }
    }
    pairs.reverse();

    TokenPairing {
        pairs,
        edit_distance: dist[n * width + m],
        counts,
    }
}
