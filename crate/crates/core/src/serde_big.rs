// Integers that fit in i64 are written as JSON numbers, larger ones as
// decimal strings, so reports stay readable without losing precision.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::SerializeSeq;
use serde::Serializer;

pub(crate) fn serialize_int<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(i) => s.serialize_i64(i),
        None => s.serialize_str(&v.to_string()),
    }
}

pub(crate) fn serialize_ints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    struct Int<'a>(&'a BigInt);
    impl serde::Serialize for Int<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize_int(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for e in v {
        seq.serialize_element(&Int(e))?;
    }
    seq.end()
}
