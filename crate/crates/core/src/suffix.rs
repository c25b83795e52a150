//! Suffix array and LCP array over `u32` texts.
//!
//! Prefix-doubling construction with counting sort on rank pairs, so the
//! whole thing is O(n log n) with small constants and no recursion.  Texts
//! here are concatenations of doubled relator words with per-string unique
//! separator symbols, which keeps common prefixes from crossing string
//! boundaries.

/// Suffix array of `text`: the permutation of `0..n` sorting all suffixes.
pub(crate) fn suffix_array(text: &[u32]) -> Vec<u32> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0];
    }
    // initial ranks: compress the (arbitrary u32) symbols
    let mut sa: Vec<u32> = (0..n as u32).collect();
    sa.sort_unstable_by_key(|&i| text[i as usize]);
    let mut rank = vec![0u32; n];
    let mut max_rank = 0u32;
    for w in 1..n {
        if text[sa[w] as usize] != text[sa[w - 1] as usize] {
            max_rank += 1;
        }
        rank[sa[w] as usize] = max_rank;
    }

    let mut tmp_sa = vec![0u32; n];
    let mut new_rank = vec![0u32; n];
    let mut counts = vec![0u32; n + 2];
    let mut k = 1usize;
    while (max_rank as usize) < n - 1 {
        let key2 = |i: usize| -> u32 {
            if i + k < n {
                rank[i + k] + 1
            } else {
                0
            }
        };
        // counting sort by second key
        counts.iter_mut().for_each(|c| *c = 0);
        for i in 0..n {
            counts[key2(i) as usize] += 1;
        }
        let mut sum = 0u32;
        for c in counts.iter_mut() {
            let v = *c;
            *c = sum;
            sum += v;
        }
        for i in 0..n {
            let slot = &mut counts[key2(i) as usize];
            tmp_sa[*slot as usize] = i as u32;
            *slot += 1;
        }
        // stable counting sort by first key
        counts.iter_mut().for_each(|c| *c = 0);
        for i in 0..n {
            counts[rank[i] as usize] += 1;
        }
        let mut sum = 0u32;
        for c in counts.iter_mut() {
            let v = *c;
            *c = sum;
            sum += v;
        }
        for &i in tmp_sa.iter() {
            let slot = &mut counts[rank[i as usize] as usize];
            sa[*slot as usize] = i;
            *slot += 1;
        }
        // re-rank
        max_rank = 0;
        new_rank[sa[0] as usize] = 0;
        for w in 1..n {
            let (a, b) = (sa[w - 1] as usize, sa[w] as usize);
            if rank[a] != rank[b] || key2(a) != key2(b) {
                max_rank += 1;
            }
            new_rank[b] = max_rank;
        }
        std::mem::swap(&mut rank, &mut new_rank);
        k *= 2;
    }
    sa
}

/// Kasai LCP array: `lcp[i]` is the length of the longest common prefix of
/// the suffixes at `sa[i-1]` and `sa[i]`; `lcp[0] = 0`.
pub(crate) fn lcp_array(text: &[u32], sa: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut lcp = vec![0u32; n];
    if n == 0 {
        return lcp;
    }
    let mut rank = vec![0u32; n];
    for (w, &i) in sa.iter().enumerate() {
        rank[i as usize] = w as u32;
    }
    let mut h = 0usize;
    for i in 0..n {
        let r = rank[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && text[i + h] == text[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_sa(text: &[u32]) -> Vec<u32> {
        let mut sa: Vec<u32> = (0..text.len() as u32).collect();
        sa.sort_by(|&a, &b| text[a as usize..].cmp(&text[b as usize..]));
        sa
    }

    fn naive_lcp(a: &[u32], b: &[u32]) -> u32 {
        a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count() as u32
    }

    #[test]
    fn banana() {
        // "banana" with b=2,a=1,n=3
        let text = [2u32, 1, 3, 1, 3, 1];
        assert_eq!(suffix_array(&text), naive_sa(&text));
        let sa = suffix_array(&text);
        let lcp = lcp_array(&text, &sa);
        for w in 1..text.len() {
            assert_eq!(
                lcp[w],
                naive_lcp(&text[sa[w - 1] as usize..], &text[sa[w] as usize..])
            );
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(suffix_array(&[]), Vec::<u32>::new());
        assert_eq!(suffix_array(&[7]), vec![0]);
        let text = [5u32, 5, 5, 5, 5];
        assert_eq!(suffix_array(&text), vec![4, 3, 2, 1, 0]);
    }

    proptest! {
        #[test]
        fn matches_naive(text in prop::collection::vec(0u32..6, 0..64)) {
            let sa = suffix_array(&text);
            prop_assert_eq!(&sa, &naive_sa(&text));
            let lcp = lcp_array(&text, &sa);
            for w in 1..text.len() {
                prop_assert_eq!(
                    lcp[w],
                    naive_lcp(&text[sa[w - 1] as usize..], &text[sa[w] as usize..])
                );
            }
        }
    }
}
