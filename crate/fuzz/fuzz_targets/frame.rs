#![no_main]

use libfuzzer_sys::fuzz_target;
use recon::protocol::message::{read_frame, Message};

fuzz_target!(|data: &[u8]| {
    let decoded = Message::decode(data);
    if let Ok((msg, used)) = &decoded {
        assert!(*used <= data.len());
        // padding bits may differ, so compare messages rather than bytes
        let (again, n) = Message::decode(&msg.encode()).expect("own frame decodes");
        assert_eq!(&again, msg);
        assert_eq!(n, msg.encode().len());
    }
    let streamed = read_frame(&mut std::io::Cursor::new(data));
    assert_eq!(streamed.is_ok(), decoded.is_ok());
});
