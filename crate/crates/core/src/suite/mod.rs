//! Cipher-suite registry and the algorithm contracts every container
//! operation is written against.
//!
//! A cipher suite bundles a key-exchange algorithm, a matching signature
//! scheme, an AEAD cipher, and a hash function, identified by a `u32`. The
//! four registered suites share the X25519/Ed25519 layer and differ only in
//! AEAD family and hash, so one key pair works with all of them.

pub mod aead;
pub mod keys;

use sha2::{Digest, Sha256, Sha512};
use thiserror::Error;

pub use aead::AeadAlgorithm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("unsupported cipher suite identifier {0:#010x}")]
    UnsupportedSuite(u32),
    #[error("invalid key material: {0}")]
    InvalidKey(&'static str),
    #[error("AEAD authentication failed")]
    AeadFailure,
    #[error("truncation length {requested} exceeds digest length {available}")]
    TruncationOutOfRange { requested: usize, available: usize },
}

/// Identifier of cipher suite I: X25519 / Ed25519 / AES-256-GCM / SHA-256.
pub const SUITE_AES256GCM_SHA256: u32 = 0x0101_0101;
/// Identifier of cipher suite II: X25519 / Ed25519 / AES-256-GCM / SHA-512.
pub const SUITE_AES256GCM_SHA512: u32 = 0x0101_0102;
/// Identifier of cipher suite III: X25519 / Ed25519 / AEGIS-256 / SHA-256.
pub const SUITE_AEGIS256_SHA256: u32 = 0x0101_0201;
/// Identifier of cipher suite IV: X25519 / Ed25519 / AEGIS-256 / SHA-512.
pub const SUITE_AEGIS256_SHA512: u32 = 0x0101_0202;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashAlgorithm {
    Sha256,
    Sha512,
}

/// Per-suite byte lengths of every variable-size field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteParams {
    /// Length of an ephemeral key-exchange public key.
    pub kex_public_len: usize,
    /// Length of the symmetric nonce.
    pub nonce_len: usize,
    /// Length of the hash output.
    pub hash_len: usize,
    /// Length of a signature.
    pub signature_len: usize,
    /// Length of a signing public key.
    pub public_key_len: usize,
    /// Length of a signing private key.
    pub private_key_len: usize,
    /// Length of the symmetric key.
    pub symmetric_key_len: usize,
}

/// One registered cipher suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CipherSuite {
    pub id: u32,
    pub name: &'static str,
    pub aead: AeadAlgorithm,
    pub hash: HashAlgorithm,
    pub params: SuiteParams,
    /// Whether signing keys convert into key-exchange keys. All registered
    /// suites support this; a suite without it would need the two-key
    /// recipient block layout, which is reserved but not implemented.
    pub supports_key_conversion: bool,
}

const fn curve25519_params(nonce_len: usize, hash_len: usize) -> SuiteParams {
    SuiteParams {
        kex_public_len: 32,
        nonce_len,
        hash_len,
        signature_len: 64,
        public_key_len: 32,
        private_key_len: 32,
        symmetric_key_len: 32,
    }
}

/// All registered suites, in identifier order.
///
/// GCM nonces follow the RFC 5116 recommendation of 12 bytes; AEGIS-256
/// requires the nonce length to equal the key length.
pub const SUITES: [CipherSuite; 4] = [
    CipherSuite {
        id: SUITE_AES256GCM_SHA256,
        name: "X25519-Ed25519-AES256GCM-SHA256",
        aead: AeadAlgorithm::Aes256Gcm,
        hash: HashAlgorithm::Sha256,
        params: curve25519_params(12, 32),
        supports_key_conversion: true,
    },
    CipherSuite {
        id: SUITE_AES256GCM_SHA512,
        name: "X25519-Ed25519-AES256GCM-SHA512",
        aead: AeadAlgorithm::Aes256Gcm,
        hash: HashAlgorithm::Sha512,
        params: curve25519_params(12, 64),
        supports_key_conversion: true,
    },
    CipherSuite {
        id: SUITE_AEGIS256_SHA256,
        name: "X25519-Ed25519-AEGIS256-SHA256",
        aead: AeadAlgorithm::Aegis256,
        hash: HashAlgorithm::Sha256,
        params: curve25519_params(32, 32),
        supports_key_conversion: true,
    },
    CipherSuite {
        id: SUITE_AEGIS256_SHA512,
        name: "X25519-Ed25519-AEGIS256-SHA512",
        aead: AeadAlgorithm::Aegis256,
        hash: HashAlgorithm::Sha512,
        params: curve25519_params(32, 64),
        supports_key_conversion: true,
    },
];

/// Looks up a registered cipher suite by identifier.
pub fn lookup_suite(id: u32) -> Result<&'static CipherSuite, SuiteError> {
    SUITES
        .iter()
        .find(|s| s.id == id)
        .ok_or(SuiteError::UnsupportedSuite(id))
}

impl CipherSuite {
    /// Hashes a message to the suite's digest length.
    pub fn hash(&self, data: &[u8]) -> Vec<u8> {
        let mut hasher = self.hasher();
        hasher.update(data);
        hasher.finalize()
    }

    /// Incremental hasher for multi-part inputs, avoiding concatenation of
    /// large buffers.
    pub fn hasher(&self) -> Hasher {
        match self.hash {
            HashAlgorithm::Sha256 => Hasher::Sha256(Sha256::new()),
            HashAlgorithm::Sha512 => Hasher::Sha512(Sha512::new()),
        }
    }

    /// Ciphertext expansion of the suite's AEAD (the authentication tag).
    pub fn aead_overhead(&self) -> usize {
        aead::TAG_LEN
    }

    pub fn aead_encrypt(
        &self,
        key: &[u8],
        nonce: &[u8],
        plaintext: &[u8],
        associated_data: &[u8],
    ) -> Result<Vec<u8>, SuiteError> {
        aead::encrypt(self.aead, key, nonce, plaintext, associated_data)
    }

    pub fn aead_decrypt(
        &self,
        key: &[u8],
        nonce: &[u8],
        ciphertext: &[u8],
        associated_data: &[u8],
    ) -> Result<Vec<u8>, SuiteError> {
        aead::decrypt(self.aead, key, nonce, ciphertext, associated_data)
    }
}

/// Streaming hash over one of the registered hash algorithms.
pub enum Hasher {
    Sha256(Sha256),
    Sha512(Sha512),
}

impl Hasher {
    pub fn update(&mut self, data: &[u8]) {
        match self {
            Hasher::Sha256(h) => h.update(data),
            Hasher::Sha512(h) => h.update(data),
        }
    }

    pub fn finalize(self) -> Vec<u8> {
        match self {
            Hasher::Sha256(h) => h.finalize().to_vec(),
            Hasher::Sha512(h) => h.finalize().to_vec(),
        }
    }
}

/// Returns the first `len` bytes of a digest.
pub fn truncate_hash(digest: &[u8], len: usize) -> Result<&[u8], SuiteError> {
    if len > digest.len() {
        return Err(SuiteError::TruncationOutOfRange {
            requested: len,
            available: digest.len(),
        });
    }
    Ok(&digest[..len])
}
