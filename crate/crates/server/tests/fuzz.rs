mod common;

use common::fuzz::{exchange, message};
use common::{start, TWO_CLASSES, URI};
use livediag_server::ServerConfig;
use proptest::prelude::*;
use serde_json::json;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    /// Whatever arrives, every request gets one answer and the server
    /// keeps serving.
    #[test]
    fn server_survives_garbage(batch in prop::collection::vec(message(), 1..20)) {
        let (_s, mut c) = start(ServerConfig::default());
        c.request("document/open", json!({ "uri": URI, "text": TWO_CLASSES })).unwrap();
        if let Err(e) = exchange(&mut c, &batch) {
            prop_assert!(false, "{}", e);
        }
        let init = c.request("initialize", json!({})).unwrap();
        prop_assert_eq!(&init["exportFormats"], &json!(["svg"]));
    }
}
