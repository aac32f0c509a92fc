//! Three short documents; only [`PLANTED_DOC`] states [`PLANTED_FACT`].

use crate::pdf::text_pdf;
use crate::zotero::{MockItem, MockLibrary};

pub const GROUP_ID: &str = "2515542";
pub const API_KEY: &str = "zotero-test-key-7f3a";

pub const PLANTED_FACT: &str = "The melting point of zobotite is 451.";
pub const PLANTED_DOC: &str = "BBBB2222";
pub const PLANTED_QUESTION: &str = "what is the melting point of zobotite?";
pub const OFF_TOPIC_QUESTION: &str = "what color are unicorn submarines?";

pub struct Doc {
    pub key: &'static str,
    pub title: &'static str,
    pub text: &'static str,
}

pub const DOCS: [Doc; 3] = [
    Doc {
        key: "AAAA1111",
        title: "Songbird migration",
        text: "Songbirds migrate at night.\n\
               Many species follow coastlines and river valleys.\n\
               Stopover sites provide food and shelter during long journeys.",
    },
    Doc {
        key: PLANTED_DOC,
        title: "Notes on rare minerals",
        text: "Zobotite is a rare green mineral found in basalt.\n\
               The melting point of zobotite is 451.\n\
               Crystals grow slowly in cooling lava.",
    },
    Doc {
        key: "CCCC3333",
        title: "Medieval bookbinding",
        text: "Medieval binders sewed quires onto leather thongs.\n\
               Wooden boards protected parchment leaves.\n\
               Clasps kept covers closed against humidity.",
    },
];

pub fn pdf_bytes(doc: &Doc) -> Vec<u8> {
    text_pdf(&[doc.text])
}

/// A group library holding the three PDFs, a note and an HTML snapshot.
pub fn library() -> MockLibrary {
    MockLibrary::group(GROUP_ID, API_KEY)
        .items(DOCS.iter().map(|d| MockItem::pdf(d.key, d.title, pdf_bytes(d))))
        .item(MockItem::note("NOTE0001"))
        .item(MockItem::attachment("SNAP0001", "Snapshot", "text/html", b"<html></html>".to_vec()))
}
