use tutor_core::eval::{evaluate_corpus, parse_corpus, Confusion, Gold};
use tutor_core::session::{Library, MINI_CORPUS};

#[test]
fn corpus_lines_and_malformed_entries() {
    let c = parse_corpus(
        "# comment\n:early correct trivial\n== exercise rel-inv-comp\n:d1 correct let (x,y) in inv(comp(R,S))\n\
         :d1 maybe trivial\nno colon here\n== exorcise x\n:d2 incorrect\n",
    );
    assert_eq!(c.steps.len(), 1);
    let s = &c.steps[0];
    assert_eq!((s.line, s.exercise.as_str(), s.dialog.as_str(), s.gold), (4, "rel-inv-comp", "d1", Gold::Correct));
    assert_eq!(s.text, "let (x,y) in inv(comp(R,S))");
    let lines: Vec<usize> = c.malformed.iter().map(|m| m.line).collect();
    assert_eq!(lines, [2, 5, 6, 7, 8]);
}

#[test]
fn bundled_corpus_has_no_false_accepts() {
    let lib = Library::bundled();
    let c = parse_corpus(MINI_CORPUS);
    assert!(c.malformed.is_empty());
    let r = evaluate_corpus(&c, &lib, Some(4));
    let correct = c.steps.iter().filter(|s| s.gold == Gold::Correct).count();
    assert_eq!(
        r.counts,
        Confusion {
            correct_verified: correct,
            correct_rejected: 0,
            incorrect_verified: 0,
            incorrect_rejected: c.steps.len() - correct
        }
    );
    assert_eq!(r.counts.total(), c.steps.len());
}

#[test]
fn depth_one_rejects_the_two_inference_step() {
    let lib = Library::bundled();
    let c = parse_corpus("== exercise rel-inv-comp\n:a correct let (x,y) in inv(comp(R,S))\n");
    let r = evaluate_corpus(&c, &lib, Some(1));
    assert_eq!(r.counts.correct_rejected, 1);
    assert_eq!(r.depth, Some(1));
    assert!(!r.steps[0].verified);
    assert_eq!(evaluate_corpus(&c, &lib, None).counts.correct_verified, 1);
}

#[test]
fn restating_the_goal_is_verified() {
    let lib = Library::bundled();
    let c = parse_corpus("== exercise rel-inv-comp\n:a correct subgoal inv(comp(R,S)) = comp(inv(S),inv(R))\n");
    assert_eq!(evaluate_corpus(&c, &lib, Some(4)).counts.correct_verified, 1);
}

#[test]
fn unusable_steps_are_reported_and_skipped() {
    let lib = Library::bundled();
    let c = parse_corpus(
        "== exercise rel-inv-comp\n:a correct let (x,y in\n:a correct let (x,y) in inv(comp(R,S))\n== exercise nowhere\n:b correct trivial\n",
    );
    let r = evaluate_corpus(&c, &lib, Some(4));
    assert_eq!(r.counts.total(), 1);
    assert_eq!(r.counts.correct_verified, 1);
    let lines: Vec<usize> = r.malformed.iter().map(|m| m.line).collect();
    assert_eq!(lines, [2, 5]);
}

#[test]
fn dialogs_keep_separate_states() {
    let lib = Library::bundled();
    // Restating the goal only works from a fresh state.
    let c = parse_corpus(
        "== exercise rel-inv-comp\n:a correct let (x,y) in inv(comp(R,S))\n\
         :b correct subgoal inv(comp(R,S)) = comp(inv(S),inv(R))\n\
         :a correct subgoal inv(comp(R,S)) = comp(inv(S),inv(R))\n",
    );
    let r = evaluate_corpus(&c, &lib, Some(4));
    let verified: Vec<bool> = r.steps.iter().map(|s| s.verified).collect();
    assert_eq!(verified, [true, true, false]);
}

#[test]
fn report_table_lists_both_rows() {
    let lib = Library::bundled();
    let r = evaluate_corpus(&parse_corpus(MINI_CORPUS), &lib, Some(4));
    let text = r.to_string();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
    assert!(rows.contains(&vec!["correct", "6", "0", "6"]), "{text}");
    assert!(rows.contains(&vec!["incorrect", "0", "1", "1"]), "{text}");
}
