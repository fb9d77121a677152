//! The container format: public header, encrypted private body, public
//! footer, and the operations that create and transform containers.
//!
//! A container is decryptable by each recipient in its hidden recipient set.
//! The public header carries one decrypt block per header slot; `m` slots
//! cover `n` real recipients plus `m - n` deception blocks, so an outside
//! observer learns only `m`. Every mutation (adding or removing a recipient,
//! replacing the content) decrypts and fully re-encrypts the container with
//! fresh keys, salt, and nonce.

mod decrypt;
mod edit;
mod encrypt;
mod parse;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::{ByteReader, ByteWriter, CodecError};
use crate::suite::keys::{self, PUBLIC_KEY_LEN, SIGNATURE_LEN};
use crate::suite::{truncate_hash, CipherSuite, SuiteError};

pub use decrypt::{decrypt, Decrypted, DecryptOptions};
pub use edit::{add_recipient, remove_recipient, set_content, RecipientSelector};
pub use encrypt::{
    encrypt, encrypt_traced, generate_deception_blocks, DeceptionMode, EncryptOptions,
    RecipientSession, SessionKeys, SlotStrategy,
};
pub use parse::{parse, serialize};

/// Format version 1.0.
pub const CONTAINER_VERSION: u32 = 0x0001_0000;
/// Value written into the Private Length field while computing the public
/// header hash, before the encrypted body length is known.
pub const PRIVATE_LENGTH_PLACEHOLDER: u32 = 0xECFF_C0DE;
/// Content type for opaque binary data, the only built-in type.
pub const CONTENT_TYPE_BLOB: u32 = 0x0000_0001;

pub const SALT_LEN: usize = 16;
pub const ID_TAG_LEN: usize = 16;
/// Byte length of the recipient-independent header fields before the nonce:
/// five `u32le` fields plus the salt.
pub const HEADER_FIXED_LEN: usize = 36;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    // Parse-time structure errors.
    #[error("not a container or unsupported version {0:#010x}")]
    BadMagicVersion(u32),
    #[error("unsupported cipher suite identifier {0:#010x}")]
    UnsupportedSuite(u32),
    #[error("length fields are inconsistent: {0}")]
    LengthMismatch(&'static str),
    #[error("file is truncated: need {need} bytes, have {have}")]
    TruncatedFile { need: usize, have: usize },

    // Decryption check failures, in procedure order.
    #[error("file hash mismatch: the file was modified after creation")]
    FileHashMismatch,
    #[error("the given key is not a recipient of this container")]
    NotARecipient,
    #[error("body decryption failed: corrupted data or corrupted key material")]
    AeadFailure,
    #[error("public header hash mismatch: the header was modified after creation")]
    PublicHeaderHashMismatch,
    #[error("recipient entry {index} carries an invalid name signature")]
    RecipientSignatureInvalid { index: usize },
    #[error("private body hash mismatch")]
    PrivateHashMismatch,
    #[error("decrypted body is malformed: {0}")]
    MalformedBody(CodecError),

    // Encryption-side validation.
    #[error("recipient set must not be empty")]
    EmptyRecipientSet,
    #[error("recipient entry {name:?} has an invalid signature or public key")]
    InvalidRecipientSignature { name: String },
    #[error("recipient public key appears twice (name {name:?})")]
    DuplicateRecipientKey { name: String },
    #[error("recipient name {0:?} appears twice")]
    DuplicateName(String),
    #[error("content too large: body of {size} bytes exceeds the {max}-byte limit")]
    ContentTooLarge { size: u64, max: u64 },
    #[error("identification tag collision between two recipients")]
    IdTagCollision,

    // Recipient-set edits.
    #[error("already a recipient of this container")]
    AlreadyRecipient,
    #[error("no recipient matches the selector")]
    RecipientNotFound,
    #[error("recipient name {0:?} is ambiguous")]
    AmbiguousName(String),
    #[error("recipients may not remove themselves")]
    SelfRemovalForbidden,
}

impl From<SuiteError> for ContainerError {
    fn from(err: SuiteError) -> Self {
        match err {
            SuiteError::UnsupportedSuite(id) => ContainerError::UnsupportedSuite(id),
            SuiteError::AeadFailure => ContainerError::AeadFailure,
            // Key-material length violations inside container operations are
            // construction bugs surfaced as tag failures, never silent.
            _ => ContainerError::AeadFailure,
        }
    }
}

/// One recipient-specific slot in the public header.
///
/// Real blocks let their recipient reconstruct the body key; deception
/// blocks are indistinguishable filler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecryptBlock {
    /// Truncated salted hash of the recipient's signing public key, or
    /// random bytes for a deception block.
    pub id_tag: [u8; ID_TAG_LEN],
    /// Ephemeral X25519 public key.
    pub ephemeral_public: Vec<u8>,
    /// XOR share of the body key: `pre_key1 = k_final XOR k_pre2`.
    pub pre_key1: Vec<u8>,
}

impl DecryptBlock {
    /// Serialized length for the given suite.
    pub fn encoded_len(suite: &CipherSuite) -> usize {
        ID_TAG_LEN + suite.params.kex_public_len + suite.params.symmetric_key_len
    }
}

/// The unencrypted header of a container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicHeader {
    pub version: u32,
    pub suite_id: u32,
    /// Header length `h` in bytes.
    pub public_length: u32,
    /// Encrypted body length `b` in bytes.
    pub private_length: u32,
    pub salt: [u8; SALT_LEN],
    pub nonce: Vec<u8>,
    /// `m` decrypt blocks, sorted ascending by id tag when produced by this
    /// implementation.
    pub blocks: Vec<DecryptBlock>,
}

impl PublicHeader {
    /// Number of header slots `m`. This is all an outside observer learns
    /// about the recipient set.
    pub fn slot_count(&self) -> u32 {
        self.blocks.len() as u32
    }
}

/// A member of the hidden recipient set: signing public key, self-chosen
/// name, and the signature over the raw UTF-8 name bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecipientEntry {
    pub public_key: Vec<u8>,
    pub name: String,
    pub signature: Vec<u8>,
}

impl RecipientEntry {
    /// True when the name signature verifies under the entry's own key.
    pub fn verify(&self) -> bool {
        keys::verify_signature(&self.public_key, self.name.as_bytes(), &self.signature)
    }

    /// Serialized length: public key, length-prefixed name, signature.
    pub fn encoded_len(&self) -> usize {
        self.public_key.len() + 4 + self.name.len() + self.signature.len()
    }

    fn write_to(&self, writer: &mut ByteWriter) {
        writer.write_bytes(&self.public_key);
        writer.write_string(&self.name);
        writer.write_bytes(&self.signature);
    }

    fn read_from(reader: &mut ByteReader<'_>) -> Result<Self, CodecError> {
        let public_key = reader.read_bytes(PUBLIC_KEY_LEN)?.to_vec();
        let name = reader.read_string()?;
        let signature = reader.read_bytes(SIGNATURE_LEN)?.to_vec();
        Ok(Self {
            public_key,
            name,
            signature,
        })
    }

    /// Serializes the entry for exchange over an untrusted channel, to be
    /// authenticated out of band via [`fingerprint`].
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut writer = ByteWriter::with_capacity(self.encoded_len());
        self.write_to(&mut writer);
        writer.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut reader = ByteReader::new(bytes);
        let entry = Self::read_from(&mut reader)?;
        reader.expect_end()?;
        Ok(entry)
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&self.public_key)
    }
}

/// Short hash of a signing public key, for comparing over a second channel
/// when exchanging recipient entries.
pub fn fingerprint(public_key: &[u8]) -> String {
    let digest = Sha256::digest(public_key);
    hex::encode(&digest[..16])
}

/// A parsed container: header, encrypted body, and file hash footer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub header: PublicHeader,
    pub encrypted_body: Vec<u8>,
    pub file_hash: Vec<u8>,
}

impl Container {
    pub fn suite(&self) -> Result<&'static CipherSuite, ContainerError> {
        crate::suite::lookup_suite(self.header.suite_id)
            .map_err(|_| ContainerError::UnsupportedSuite(self.header.suite_id))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        serialize(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ContainerError> {
        parse(bytes)
    }
}

/// Identification tag of a signing public key under the given salt: the
/// leading 16 bytes of `hash(public_key || salt)`.
pub fn compute_id_tag(
    suite: &CipherSuite,
    signing_public_key: &[u8],
    salt: &[u8; SALT_LEN],
) -> [u8; ID_TAG_LEN] {
    let mut hasher = suite.hasher();
    hasher.update(signing_public_key);
    hasher.update(salt);
    let digest = hasher.finalize();
    truncate_hash(&digest, ID_TAG_LEN)
        .expect("digest is longer than a tag")
        .try_into()
        .expect("tag slice has fixed length")
}
