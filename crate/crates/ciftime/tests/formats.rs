//! Write-then-read round trips of the weights and CTM formats.

use ciftime::core::{TimestampTrack, TrackEntry};
use ciftime::ctm::{format_ctm, parse_ctm};
use ciftime::weights_file::{parse_weights, weights_to_string, WeightsRecord};
use proptest::prelude::*;

fn record() -> impl Strategy<Value = WeightsRecord> {
    (1usize..40)
        .prop_flat_map(|n| {
            (
                "[a-z][a-z0-9_]{0,8}",
                0.5f64..100.0,
                prop::collection::vec(0.0f64..2.0, n),
                prop::option::of(prop::collection::vec(-30.0f64..30.0, n)),
                prop::option::of(prop::collection::vec("[A-Za-z<>]{1,4}", 0..6)),
            )
        })
        .prop_map(|(id, frame_ms, alpha, logits, tokens)| WeightsRecord {
            id,
            frame_ms,
            alpha,
            logits,
            tokens,
        })
}

fn track(id: String) -> impl Strategy<Value = TimestampTrack> {
    prop::collection::vec((0.0f64..300.0, 1.0f64..900.0, 0u8..5), 0..12).prop_map(move |spans| {
        let mut t = 0.0;
        let mut entries = Vec::new();
        let mut prev_sil = false;
        for (gap, dur, kind) in spans {
            t += gap;
            let sil = kind == 0 && !prev_sil && gap == 0.0;
            let e = if sil {
                TrackEntry::silence(t, t + dur)
            } else {
                TrackEntry::token(["a", "bb", "c", "<unk>"][kind as usize % 4], t, t + dur)
            };
            prev_sil = sil;
            entries.push(e);
            t += dur;
        }
        TimestampTrack::new(id.clone(), entries)
    })
}

proptest! {
    #[test]
    fn weights_round_trip_exactly(records in prop::collection::vec(record(), 0..5)) {
        let mut records = records;
        let mut seen = std::collections::HashSet::new();
        records.retain(|r| seen.insert(r.id.clone()));
        let text = weights_to_string(&records);
        let parsed = parse_weights(&text, "w");
        prop_assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
        let back: Vec<WeightsRecord> = parsed
            .items
            .iter()
            .map(|e| WeightsRecord::from_weights(&e.weights, e.tokens.clone()))
            .collect();
        prop_assert_eq!(&back, &records);
        prop_assert_eq!(weights_to_string(&back), text);
    }

    #[test]
    fn ctm_round_trip_is_stable_at_printed_precision(a in track("utt_b".into()), b in track("utt_a".into())) {
        let tracks = vec![a, b];
        let text = format_ctm(&tracks).unwrap();
        let parsed = parse_ctm(&text, "c");
        prop_assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
        prop_assert_eq!(format_ctm(&parsed.items).unwrap(), text.clone());
        for t in &parsed.items {
            let orig = tracks.iter().find(|o| o.utt_id == t.utt_id).unwrap();
            prop_assert_eq!(t.entries.len(), orig.entries.len());
            for (x, y) in t.entries.iter().zip(&orig.entries) {
                prop_assert_eq!(&x.label, &y.label);
                prop_assert!((x.start_ms - y.start_ms).abs() <= 0.5 + 1e-9);
                prop_assert!((x.end_ms - y.end_ms).abs() <= 0.5 + 1e-9);
            }
        }
        // rows sorted by (utt_id, start)
        let keys: Vec<(String, f64)> = text
            .lines()
            .map(|l| {
                let f: Vec<&str> = l.split(' ').collect();
                (f[0].to_string(), f[2].parse().unwrap())
            })
            .collect();
        prop_assert!(keys.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 <= w[1].1)));
    }
}
