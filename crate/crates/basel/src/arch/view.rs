//! A comparator-ordered view over a queue's packet store.
//!
//! The view holds packet sequence numbers sorted so that index 0 is the head
//! under a caller-supplied precedence; only the head is ever observed by the
//! engine. Insertion keeps the order with a binary search over fallible
//! comparator evaluations, so a view is never rebuilt — a re-keyed packet
//! (its processing just changed) is removed and reinserted instead.

use super::Packet;
use crate::diag::EvalError;

/// Direction ties fall: processing views keep the earliest packet first,
/// push-out views drop the latest packet first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    SmallerSeqFirst,
    LargerSeqFirst,
}

#[derive(Debug, Clone, Default)]
pub struct PriorityView {
    order: Vec<u64>,
}

impl PriorityView {
    pub fn head(&self) -> Option<u64> {
        self.order.first().copied()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn contains(&self, seq: u64) -> bool {
        self.order.contains(&seq)
    }

    #[cfg(test)]
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.order.iter().copied()
    }

    /// True when `a` comes before `b` in this view.
    fn precedes(
        a: &Packet,
        b: &Packet,
        cmp: &dyn Fn(&Packet, &Packet) -> Result<bool, EvalError>,
        tie: TieBreak,
    ) -> Result<bool, EvalError> {
        let ab = cmp(a, b)?;
        let ba = cmp(b, a)?;
        if ab != ba {
            return Ok(ab);
        }
        Ok(match tie {
            TieBreak::SmallerSeqFirst => a.seq < b.seq,
            TieBreak::LargerSeqFirst => a.seq > b.seq,
        })
    }

    pub fn insert(
        &mut self,
        seq: u64,
        resolve: &dyn Fn(u64) -> Packet,
        cmp: &dyn Fn(&Packet, &Packet) -> Result<bool, EvalError>,
        tie: TieBreak,
    ) -> Result<(), EvalError> {
        debug_assert!(!self.contains(seq), "seq {} already in view", seq);
        let new = resolve(seq);
        let mut lo = 0usize;
        let mut hi = self.order.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            let existing = resolve(self.order[mid]);
            if Self::precedes(&existing, &new, cmp, tie)? {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        self.order.insert(lo, seq);
        Ok(())
    }

    /// Remove by value. Returns false when absent.
    pub fn remove(&mut self, seq: u64) -> bool {
        match self.order.iter().position(|&s| s == seq) {
            Some(idx) => {
                self.order.remove(idx);
                true
            }
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkt(seq: u64, processing: i64) -> Packet {
        Packet {
            seq,
            size: 1,
            value: 1,
            processing,
            arrival: 0,
            slack: None,
            queue: 0,
        }
    }

    #[test]
    fn orders_by_comparator_with_seq_ties() {
        let packets = [pkt(0, 3), pkt(1, 1), pkt(2, 3), pkt(3, 2)];
        let resolve = |s: u64| packets[s as usize];
        let srpt = |a: &Packet, b: &Packet| Ok(a.processing < b.processing);

        let mut view = PriorityView::default();
        for p in &packets {
            view.insert(p.seq, &resolve, &srpt, TieBreak::SmallerSeqFirst)
                .unwrap();
        }
        let order: Vec<u64> = view.iter().collect();
        assert_eq!(order, vec![1, 3, 0, 2]);

        let mut view = PriorityView::default();
        for p in &packets {
            view.insert(p.seq, &resolve, &srpt, TieBreak::LargerSeqFirst)
                .unwrap();
        }
        let order: Vec<u64> = view.iter().collect();
        assert_eq!(order, vec![1, 3, 2, 0]);
    }

    #[test]
    fn comparator_faults_propagate() {
        let packets = [pkt(0, 1), pkt(1, 2)];
        let resolve = |s: u64| packets[s as usize];
        let faulting =
            |_: &Packet, _: &Packet| Err::<bool, _>(EvalError::new("division by zero"));
        let mut view = PriorityView::default();
        view.insert(0, &resolve, &faulting, TieBreak::SmallerSeqFirst)
            .unwrap(); // single element needs no comparison
        let err = view
            .insert(1, &resolve, &faulting, TieBreak::SmallerSeqFirst)
            .unwrap_err();
        assert!(err.message.contains("division"));
        assert_eq!(view.len(), 1);
    }

    #[test]
    fn remove_and_reinsert_rekeys() {
        let mut packets = [pkt(0, 2), pkt(1, 2)];
        let srpt = |a: &Packet, b: &Packet| Ok(a.processing < b.processing);
        let mut view = PriorityView::default();
        {
            let resolve = |s: u64| packets[s as usize];
            for p in &packets {
                view.insert(p.seq, &resolve, &srpt, TieBreak::SmallerSeqFirst)
                    .unwrap();
            }
        }
        assert_eq!(view.head(), Some(0));
        packets[0].processing = 1;
        assert!(view.remove(0));
        let resolve = |s: u64| packets[s as usize];
        view.insert(0, &resolve, &srpt, TieBreak::SmallerSeqFirst)
            .unwrap();
        assert_eq!(view.head(), Some(0));
        assert_eq!(view.len(), 2);
    }
}
