use onshelf::dataset_io::{format_pattern, write_database};
use onshelf::{parse_database_str, ItemId, Money, OnShelfDatabase, Pattern, Period};
use proptest::collection::{btree_map, vec};
use proptest::prelude::*;

/// Rows whose item signs are consistent (item id parity decides the sign)
/// and whose period totals are positive (a large positive item per row).
fn rows() -> impl Strategy<Value = Vec<(Period, Vec<(ItemId, i64)>)>> {
    vec(
        (0u32..5, btree_map(2u32..40, 1i64..50, 0..6)),
        1..30,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(h, items)| {
                let mut row = vec![(1, 1000)];
                row.extend(items.into_iter().map(|(i, u)| (i, if i % 2 == 0 { -u } else { u })));
                (h, row)
            })
            .collect()
    })
}

fn build(rows: &[(Period, Vec<(ItemId, i64)>)]) -> OnShelfDatabase {
    let framed: Vec<(Period, &[(ItemId, i64)])> = rows.iter().map(|(h, r)| (*h, r.as_slice())).collect();
    OnShelfDatabase::from_utilities(&framed).unwrap()
}

proptest! {
    #[test]
    fn write_then_parse_is_identity(rows in rows()) {
        let db = build(&rows);
        let mut text = Vec::new();
        write_database(&db, &mut text).unwrap();
        let back = parse_database_str(std::str::from_utf8(&text).unwrap()).unwrap();
        prop_assert_eq!(back.transactions(), db.transactions());
        prop_assert_eq!(back.period_totals(), db.period_totals());
        prop_assert_eq!(back.items(), db.items());
    }

    #[test]
    fn reperiod_keeps_content(rows in rows(), n in 1u32..6) {
        let db = build(&rows);
        let re = db.reperiod(n).unwrap();
        prop_assert_eq!(re.transactions().len(), db.transactions().len());
        for (i, (a, b)) in db.transactions().iter().zip(re.transactions()).enumerate() {
            prop_assert_eq!(&a.entries, &b.entries);
            prop_assert_eq!(b.period, i as u32 % n);
        }
    }
}

#[test]
fn pattern_line_format() {
    let p = Pattern::new(vec![5, 2], Money(28), vec![1, 2], Money(154));
    assert_eq!(format_pattern(&p), "2 5 #UTIL: 28 #TO: 154 #RU: 28/154");
}
