//! Minimal PDF writers for test fixtures.
//!
//! Each page's text is emitted as a sequence of `Tj` lines in the standard
//! Helvetica font, so any conforming extractor can recover the source text.

use lopdf::content::{Content, Operation};
use lopdf::{Document, EncryptionState, EncryptionVersion, Object, Permissions, Stream, dictionary};

/// Builds a text-bearing PDF with one page per entry of `pages`.
///
/// Lines within a page are split on `\n`. Only printable ASCII survives the
/// standard font encoding, so fixtures should stick to it.
pub fn text_pdf(pages: &[&str]) -> Vec<u8> {
    let mut doc = build(pages.iter().map(|p| PageKind::Text(p)).collect());
    save(&mut doc)
}

/// Builds a PDF whose single page is an image XObject with no text operators,
/// the shape of a scanned document.
pub fn image_only_pdf() -> Vec<u8> {
    let mut doc = build(vec![PageKind::Image]);
    save(&mut doc)
}

/// Builds a text PDF protected by a non-empty user password.
pub fn encrypted_pdf(pages: &[&str], user_password: &str) -> Vec<u8> {
    let mut doc = build(pages.iter().map(|p| PageKind::Text(p)).collect());
    let file_id = Object::string_literal(b"kzb-fixture-0001".to_vec());
    doc.trailer.set("ID", vec![file_id.clone(), file_id]);
    let state = EncryptionState::try_from(EncryptionVersion::V2 {
        document: &doc,
        owner_password: "owner-secret",
        user_password,
        key_length: 128,
        permissions: Permissions::all(),
    })
    .expect("encryption state");
    doc.encrypt(&state).expect("encrypt fixture");
    save(&mut doc)
}

enum PageKind<'a> {
    Text(&'a str),
    Image,
}

fn build(pages: Vec<PageKind<'_>>) -> Document {
    let mut doc = Document::with_version("1.5");
    let pages_id = doc.new_object_id();
    let font_id = doc.add_object(dictionary! {
        "Type" => "Font",
        "Subtype" => "Type1",
        "BaseFont" => "Helvetica",
        "Encoding" => "WinAnsiEncoding",
    });

    let mut kids = Vec::with_capacity(pages.len());
    for page in pages {
        let (content, resources) = match page {
            PageKind::Text(text) => {
                let mut ops = vec![
                    Operation::new("BT", vec![]),
                    Operation::new("Tf", vec!["F1".into(), 11.into()]),
                    Operation::new("TL", vec![14.into()]),
                    Operation::new("Td", vec![72.into(), 720.into()]),
                ];
                for (i, line) in text.split('\n').enumerate() {
                    if i > 0 {
                        ops.push(Operation::new("T*", vec![]));
                    }
                    ops.push(Operation::new("Tj", vec![Object::string_literal(line)]));
                }
                ops.push(Operation::new("ET", vec![]));
                (Content { operations: ops }, dictionary! { "Font" => dictionary! { "F1" => font_id } })
            }
            PageKind::Image => {
                // 2x2 grey image
                let image = Stream::new(
                    dictionary! {
                        "Type" => "XObject",
                        "Subtype" => "Image",
                        "Width" => 2,
                        "Height" => 2,
                        "ColorSpace" => "DeviceGray",
                        "BitsPerComponent" => 8,
                    },
                    vec![0x20, 0x80, 0x80, 0x20],
                );
                let image_id = doc.add_object(image);
                let ops = vec![
                    Operation::new("q", vec![]),
                    Operation::new(
                        "cm",
                        vec![400.into(), 0.into(), 0.into(), 400.into(), 100.into(), 300.into()],
                    ),
                    Operation::new("Do", vec!["Im1".into()]),
                    Operation::new("Q", vec![]),
                ];
                (Content { operations: ops }, dictionary! { "XObject" => dictionary! { "Im1" => image_id } })
            }
        };
        let content_id = doc.add_object(Stream::new(dictionary! {}, content.encode().expect("encode content")));
        let page_id = doc.add_object(dictionary! {
            "Type" => "Page",
            "Parent" => pages_id,
            "Contents" => content_id,
            "Resources" => resources,
            "MediaBox" => vec![0.into(), 0.into(), 612.into(), 792.into()],
        });
        kids.push(Object::from(page_id));
    }

    let count = kids.len() as i64;
    doc.objects.insert(
        pages_id,
        Object::Dictionary(dictionary! {
            "Type" => "Pages",
            "Kids" => kids,
            "Count" => count,
        }),
    );
    let catalog_id = doc.add_object(dictionary! {
        "Type" => "Catalog",
        "Pages" => pages_id,
    });
    doc.trailer.set("Root", catalog_id);
    doc
}

fn save(doc: &mut Document) -> Vec<u8> {
    let mut out = Vec::new();
    doc.save_to(&mut out).expect("write fixture pdf");
    out
}
