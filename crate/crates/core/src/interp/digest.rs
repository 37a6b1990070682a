use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

/// Two independent 64-bit SipHash values of `x`. Used as a content identity: two distinct
/// values agreeing on all 128 bits is not a practical concern at the sizes explored here.
pub(crate) fn digest<T: Hash + ?Sized>(x: &T) -> u128 {
    let mut a = DefaultHasher::new();
    x.hash(&mut a);
    let mut b = DefaultHasher::new();
    0x5eed_u16.hash(&mut b);
    x.hash(&mut b);
    (u128::from(a.finish()) << 64) | u128::from(b.finish())
}
