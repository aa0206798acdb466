// Reading chat transcripts: CSV in, ordered group conversations out.
//
//     cargo run -p gca --example ingest_transcripts

use gca::corpus::{ingest_transcripts_str, tokenize, transcript_documents};

const CHAT: &str = "\
group_id,person_id,chat_time,chat_text
958,941,11/9/15 17:12,hello
958,347,11/9/15 17:13,\"ok cool, everyone's here. sooo first question\"
958,152,11/9/15 17:14,doesn't it have to be like a stable thing?
958,941,,yeah stable over time
961,12,2015-11-09T17:20:00,who wants to start
961,40,2015-11-09T17:21:00,
";

pub fn run() -> gca::Result<()> {
    let ingested = ingest_transcripts_str(CHAT)?;
    for g in &ingested.groups {
        println!(
            "group {}: {} turns by {} participants",
            g.group_id,
            g.n(),
            g.k()
        );
        for c in &g.contributions {
            println!("  #{} {:>4} {:?}", c.index, c.participant_id, c.tokens);
        }
    }
    // Odd rows are kept and reported, not dropped.
    for w in &ingested.warnings {
        println!("warning: {w}");
    }
    assert_eq!(ingested.groups.len(), 2);
    assert_eq!(tokenize("Doesn't it?"), ["doesn", "t", "it"]);

    // Every non-empty turn can double as a background document.
    let docs = transcript_documents(&ingested.groups);
    println!("{} transcript documents", docs.len());
    assert_eq!(docs.len(), 5);
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
