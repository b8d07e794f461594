//! Character-level Levenshtein distance, two-row dynamic programming.

/// Minimum number of single-character insertions, deletions, and
/// substitutions transforming `a` into `b`.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut cur: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev_diag = cur[0];
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let tmp = cur[j + 1];
            let subst = prev_diag + usize::from(ca != cb);
            cur[j + 1] = (tmp + 1).min(cur[j] + 1).min(subst);
            prev_diag = tmp;
        }
    }
    cur[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exponential reference implementation; only sane for tiny strings.
    fn levenshtein_naive(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((ca, ra)), Some((cb, rb))) => {
                if ca == cb {
                    levenshtein_naive(ra, rb)
                } else {
                    1 + levenshtein_naive(ra, rb)
                        .min(levenshtein_naive(a, rb))
                        .min(levenshtein_naive(ra, b))
                }
            }
        }
    }

    #[test]
    fn identity_is_zero() {
        assert_eq!(levenshtein("median([1, 2]) is 1", "median([1, 2]) is 1"), 0);
        assert_eq!(levenshtein("", ""), 0);
    }

    #[test]
    fn single_character_edit() {
        assert_eq!(levenshtein("median([1, 2]) is 1", "median([1, 2]) is 2"), 1);
    }

    #[test]
    fn kitten_sitting() {
        let a: Vec<char> = "kitten".chars().collect();
        let b: Vec<char> = "sitting".chars().collect();
        assert_eq!(levenshtein_naive(&a, &b), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn agrees_with_naive_on_short_strings() {
        let words = ["", "a", "ab", "ba", "abc", "cab", "aa", "abcd", "median"];
        for x in words {
            for y in words {
                let xv: Vec<char> = x.chars().collect();
                let yv: Vec<char> = y.chars().collect();
                assert_eq!(levenshtein(x, y), levenshtein_naive(&xv, &yv), "{:?} vs {:?}", x, y);
            }
        }
    }

    #[test]
    fn unicode_counts_chars_not_bytes() {
        assert_eq!(levenshtein("héllo", "hello"), 1);
    }
}
