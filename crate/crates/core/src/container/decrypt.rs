//! Container decryption.
//!
//! The checks run in a fixed order and each failure maps to its own error:
//! file hash, recipient lookup, AEAD authentication, public header hash,
//! per-recipient name signatures, private body hash. Any modification of a
//! container therefore fails loudly with a classified error, never silently.

use zeroize::Zeroizing;

use crate::codec::ByteReader;
use crate::suite::keys::{self, PrivateKey};

use super::parse::{public_header_hash, serialize_header};
use super::{compute_id_tag, Container, ContainerError, RecipientEntry, CONTENT_TYPE_BLOB};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecryptOptions {
    /// Verify every recipient entry's name signature. On by default; may be
    /// switched off where throughput matters more, at the price of not
    /// noticing a forged name.
    pub verify_signatures: bool,
}

impl Default for DecryptOptions {
    fn default() -> Self {
        Self {
            verify_signatures: true,
        }
    }
}

/// The plaintext of a container: the hidden recipient set and the content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decrypted {
    pub recipients: Vec<RecipientEntry>,
    pub content: Vec<u8>,
    /// Content type identifier from the body. Anything other than
    /// [`CONTENT_TYPE_BLOB`](super::CONTENT_TYPE_BLOB) is surfaced as opaque
    /// bytes for the caller to interpret.
    pub content_type: u32,
}

impl Decrypted {
    pub fn is_blob(&self) -> bool {
        self.content_type == CONTENT_TYPE_BLOB
    }
}

/// Decrypts a container with a recipient's private key.
pub fn decrypt(
    key: &PrivateKey,
    container: &Container,
    options: &DecryptOptions,
) -> Result<Decrypted, ContainerError> {
    let suite = container.suite()?;
    let params = suite.params;
    // The single-key recipient layout parsed below relies on signing keys
    // converting into key-exchange keys; the two-key layout for suites
    // without that capability is reserved, not implemented.
    if !suite.supports_key_conversion {
        return Err(ContainerError::UnsupportedSuite(suite.id));
    }

    // File hash over header and encrypted body.
    let mut hasher = suite.hasher();
    hasher.update(&serialize_header(&container.header, None));
    hasher.update(&container.encrypted_body);
    if hasher.finalize() != container.file_hash {
        return Err(ContainerError::FileHashMismatch);
    }

    // Locate this key's decrypt block by its salted id tag.
    let kex_secret = key.kex_secret();
    let kex_public = key.kex_public();
    let id_tag = compute_id_tag(suite, &key.public_key_bytes(), &container.header.salt);
    let block = container
        .header
        .blocks
        .iter()
        .find(|b| b.id_tag == id_tag)
        .ok_or(ContainerError::NotARecipient)?;

    // Undo the key wrapping: k_final = pre_key1 XOR k_pre2.
    let ephemeral_public = keys::parse_kex_public(&block.ephemeral_public)?;
    let shared_secret = keys::kex(&kex_secret, &ephemeral_public);
    let derived_share = super::encrypt::derive_share(
        suite,
        shared_secret.as_ref(),
        &kex_public,
        &block.ephemeral_public,
    );
    let final_key = Zeroizing::new(super::encrypt::xor(&block.pre_key1, &derived_share));

    let body = Zeroizing::new(suite.aead_decrypt(
        &final_key,
        &container.header.nonce,
        &container.encrypted_body,
        &[],
    )?);

    // Deconstruct the plaintext body.
    let mut reader = ByteReader::new(&body);
    let content_type = reader.read_u32le().map_err(ContainerError::MalformedBody)?;
    let header_hash = reader
        .read_bytes(params.hash_len)
        .map_err(ContainerError::MalformedBody)?
        .to_vec();
    let recipient_count = reader.read_u32le().map_err(ContainerError::MalformedBody)?;
    if u64::from(recipient_count) > u64::from(container.header.slot_count()) {
        return Err(ContainerError::MalformedBody(
            crate::codec::CodecError::Truncated {
                need: recipient_count as usize,
                have: container.header.slot_count() as usize,
            },
        ));
    }
    let mut recipients = Vec::with_capacity(recipient_count as usize);
    for _ in 0..recipient_count {
        let public_key = reader
            .read_bytes(params.public_key_len)
            .map_err(ContainerError::MalformedBody)?
            .to_vec();
        let name = reader.read_string().map_err(ContainerError::MalformedBody)?;
        let signature = reader
            .read_bytes(params.signature_len)
            .map_err(ContainerError::MalformedBody)?
            .to_vec();
        recipients.push(RecipientEntry {
            public_key,
            name,
            signature,
        });
    }
    let content_len = reader.read_u32le().map_err(ContainerError::MalformedBody)?;
    let content = reader
        .read_bytes(content_len as usize)
        .map_err(ContainerError::MalformedBody)?
        .to_vec();
    let body_without_hash_len = reader.position();
    let private_hash = reader
        .read_bytes(params.hash_len)
        .map_err(ContainerError::MalformedBody)?
        .to_vec();
    reader.expect_end().map_err(ContainerError::MalformedBody)?;

    // Public header hash, bound into the encrypted body at creation time.
    if public_header_hash(suite, &container.header) != header_hash {
        return Err(ContainerError::PublicHeaderHashMismatch);
    }

    // Name signatures of every recipient entry.
    if options.verify_signatures {
        for (index, entry) in recipients.iter().enumerate() {
            if !entry.verify() {
                return Err(ContainerError::RecipientSignatureInvalid { index });
            }
        }
    }

    // Private body hash over everything before the hash field itself.
    if suite.hash(&body[..body_without_hash_len]) != private_hash {
        return Err(ContainerError::PrivateHashMismatch);
    }

    Ok(Decrypted {
        recipients,
        content,
        content_type,
    })
}
