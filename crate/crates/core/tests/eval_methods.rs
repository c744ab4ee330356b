use talentmine_core::eval::{compare_methods, MethodConfig};
use talentmine_core::fixtures::{generate_fixtures, FixtureSpec};

#[test]
fn semantic_beats_csv_on_default_fixture() {
    let f = generate_fixtures(&FixtureSpec::default()).unwrap();
    let cmp = compare_methods(&[MethodConfig::semantic(), MethodConfig::csv_baseline()], &f.gold, std::slice::from_ref(&f.bundle)).unwrap();
    println!("{}", cmp.render_text());
    for r in &cmp.reports[0].records {
        if !r.correct {
            let q = f.gold.iter().find(|g| g.qid == r.qid).unwrap();
            println!("MISS {} {:?} expected {} got {:?}", r.qid, q.question, r.expected, r.produced.text);
        }
    }
    assert_eq!(cmp.reports[0].accuracy, 1.0);
    assert!(cmp.reports[1].accuracy <= 0.4);
}

