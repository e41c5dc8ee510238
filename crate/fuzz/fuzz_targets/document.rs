#![no_main]

use libfuzzer_sys::fuzz_target;
use shapdag_cli::document::{parse_document, GraphDocument};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = parse_document(text) else { return };
    let Ok(loaded) = doc.load() else { return };
    let again = GraphDocument::from_parts(
        &loaded.graph,
        loaded.edge_weights.as_ref(),
        loaded.root_weights.as_ref(),
        loaded.values.as_ref(),
        loaded.kernel.clone(),
    )
    .to_json();
    let reparsed = parse_document(&again).expect("serialized documents parse");
    let reloaded = reparsed.load().expect("serialized documents load");
    assert_eq!(reloaded.graph.labels(), loaded.graph.labels());
    assert_eq!(reloaded.values.as_ref().map(|v| v.values()), loaded.values.as_ref().map(|v| v.values()));
    if let Some(v) = &loaded.values {
        if loaded.graph.vertex_count() <= 64 {
            assert_eq!(&v.moebius_transform().inverse_moebius(), v);
        }
    }
});
