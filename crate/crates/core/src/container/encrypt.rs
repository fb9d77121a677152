//! Container encryption and deception-block generation.
//!
//! Encryption wraps one fresh symmetric body key per container. Each real
//! recipient gets a decrypt block carrying an ephemeral X25519 public key
//! and the XOR of the body key with a key derived from the recipient-specific
//! exchange, so only the holder of the matching private key can undo it. No
//! private key is required to encrypt: the recipient entries carry all the
//! public material needed.

use rand_core::{CryptoRng, RngCore};
use x25519_dalek::{PublicKey as KexPublicKey, StaticSecret};
use zeroize::Zeroizing;

use crate::codec::ByteWriter;
use crate::suite::keys::{self, PrivateKey};
use crate::suite::{truncate_hash, CipherSuite};

use super::parse::{public_header_hash, serialize_header};
use super::{
    compute_id_tag, Container, ContainerError, DecryptBlock, PublicHeader, RecipientEntry,
    CONTAINER_VERSION, CONTENT_TYPE_BLOB, HEADER_FIXED_LEN, ID_TAG_LEN, SALT_LEN,
};

/// How many header slots `m` to allocate for `n` real recipients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotStrategy {
    /// Uniform random in `[n, max(8, 2n)]`; the default. Hides the true
    /// recipient count from anyone reading the public header.
    Obfuscated,
    /// Exactly `max(k, n)` slots.
    Exact(u32),
    /// No deception blocks: `m = n`.
    None,
}

/// How deception blocks are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeceptionMode {
    /// Random id tag and key share plus a real ephemeral key; the default.
    /// Indistinguishable from real blocks as long as the suite's hash output
    /// is indistinguishable from random bytes.
    Simplified,
    /// Runs the complete per-recipient derivation against a throwaway key
    /// pair. Slower, kept for conformance testing.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncryptOptions {
    pub slot_strategy: SlotStrategy,
    pub deception_mode: DeceptionMode,
    pub allow_duplicate_names: bool,
}

impl Default for EncryptOptions {
    fn default() -> Self {
        Self {
            slot_strategy: SlotStrategy::Obfuscated,
            deception_mode: DeceptionMode::Simplified,
            allow_duplicate_names: false,
        }
    }
}

/// Transient key material left over from one encryption. Never serialized;
/// exposed so tests and diagnostics can verify the key wrapping
/// independently. Handle like a private key.
pub struct SessionKeys {
    /// The symmetric key the body was encrypted under.
    pub final_key: Zeroizing<Vec<u8>>,
    /// Per-recipient derivation intermediates, ordered like the input set.
    pub recipients: Vec<RecipientSession>,
}

/// Intermediates of one recipient's key wrapping. The invariant
/// `pre_key1 XOR derived_share == final_key` ties the public decrypt block
/// to the session.
pub struct RecipientSession {
    pub id_tag: [u8; ID_TAG_LEN],
    pub shared_secret: Zeroizing<Vec<u8>>,
    pub derived_share: Zeroizing<Vec<u8>>,
}

/// `hash(shared_secret || recipient_kex_public || ephemeral_public)`
/// truncated to the symmetric key length. Using the hash construction
/// instead of the raw shared secret avoids structure in raw curve points.
pub(crate) fn derive_share(
    suite: &CipherSuite,
    shared_secret: &[u8],
    recipient_kex_public: &KexPublicKey,
    ephemeral_public: &[u8],
) -> Zeroizing<Vec<u8>> {
    let mut hasher = suite.hasher();
    hasher.update(shared_secret);
    hasher.update(recipient_kex_public.as_bytes());
    hasher.update(ephemeral_public);
    let digest = hasher.finalize();
    Zeroizing::new(
        truncate_hash(&digest, suite.params.symmetric_key_len)
            .expect("digest not shorter than symmetric key")
            .to_vec(),
    )
}

pub(crate) fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn random_bytes(rng: &mut (impl RngCore + CryptoRng), len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    rng.fill_bytes(&mut out);
    out
}

fn random_kex_keypair(rng: &mut (impl RngCore + CryptoRng)) -> (StaticSecret, KexPublicKey) {
    let mut seed = Zeroizing::new([0u8; 32]);
    rng.fill_bytes(seed.as_mut());
    let secret = StaticSecret::from(*seed);
    let public = KexPublicKey::from(&secret);
    (secret, public)
}

/// Unbiased integer in `[lo, hi]`.
fn gen_range_inclusive(rng: &mut (impl RngCore + CryptoRng), lo: u64, hi: u64) -> u64 {
    debug_assert!(lo <= hi);
    let span = hi - lo + 1;
    let zone = u64::MAX - u64::MAX % span;
    loop {
        let sample = rng.next_u64();
        if sample < zone {
            return lo + sample % span;
        }
    }
}

fn generate_one_deception_block(
    suite: &CipherSuite,
    salt: &[u8; SALT_LEN],
    mode: DeceptionMode,
    rng: &mut (impl RngCore + CryptoRng),
) -> DecryptBlock {
    let key_len = suite.params.symmetric_key_len;
    match mode {
        DeceptionMode::Simplified => {
            let (_, ephemeral_public) = random_kex_keypair(rng);
            let mut id_tag = [0u8; ID_TAG_LEN];
            rng.fill_bytes(&mut id_tag);
            DecryptBlock {
                id_tag,
                ephemeral_public: ephemeral_public.as_bytes().to_vec(),
                pre_key1: random_bytes(rng, key_len),
            }
        }
        DeceptionMode::Full => {
            let decoy = PrivateKey::generate(rng);
            let decoy_kex_public = decoy.kex_public();
            let id_tag = compute_id_tag(suite, &decoy.public_key_bytes(), salt);
            let (ephemeral_secret, ephemeral_public) = random_kex_keypair(rng);
            let decoy_key = Zeroizing::new(random_bytes(rng, key_len));
            let shared_secret = keys::kex(&ephemeral_secret, &decoy_kex_public);
            let share = derive_share(
                suite,
                shared_secret.as_ref(),
                &decoy_kex_public,
                ephemeral_public.as_bytes(),
            );
            DecryptBlock {
                id_tag,
                ephemeral_public: ephemeral_public.as_bytes().to_vec(),
                pre_key1: xor(&decoy_key, &share),
            }
        }
    }
}

/// Generates `count` deception blocks with unique id tags.
pub fn generate_deception_blocks(
    suite: &CipherSuite,
    salt: &[u8; SALT_LEN],
    count: usize,
    mode: DeceptionMode,
    rng: &mut (impl RngCore + CryptoRng),
) -> Vec<DecryptBlock> {
    let mut taken: std::collections::HashSet<[u8; ID_TAG_LEN]> = std::collections::HashSet::new();
    let mut blocks = Vec::with_capacity(count);
    while blocks.len() < count {
        let block = generate_one_deception_block(suite, salt, mode, rng);
        if taken.insert(block.id_tag) {
            blocks.push(block);
        }
    }
    blocks
}

/// Encrypts `content` for the given recipient set. See [`encrypt_traced`].
pub fn encrypt(
    suite: &CipherSuite,
    recipients: &[RecipientEntry],
    content: &[u8],
    options: &EncryptOptions,
    rng: &mut (impl RngCore + CryptoRng),
) -> Result<Container, ContainerError> {
    encrypt_traced(suite, recipients, content, options, rng).map(|(container, _)| container)
}

/// Encrypts `content` for the given recipient set and additionally returns
/// the transient session keys.
///
/// Every entry's name signature must verify, public keys must be unique, and
/// names must be unique unless duplicates are allowed. The resulting
/// container is decryptable by exactly the private keys matching the
/// entries' public keys.
pub fn encrypt_traced(
    suite: &CipherSuite,
    recipients: &[RecipientEntry],
    content: &[u8],
    options: &EncryptOptions,
    rng: &mut (impl RngCore + CryptoRng),
) -> Result<(Container, SessionKeys), ContainerError> {
    if recipients.is_empty() {
        return Err(ContainerError::EmptyRecipientSet);
    }
    // Suites whose signing keys cannot convert into key-exchange keys need
    // the reserved two-key recipient layout, which no registered suite uses.
    if !suite.supports_key_conversion {
        return Err(ContainerError::UnsupportedSuite(suite.id));
    }
    validate_recipient_set(recipients, options.allow_duplicate_names)?;

    let params = suite.params;
    let key_len = params.symmetric_key_len;
    let n = recipients.len() as u64;

    // Step 1: fresh body key, nonce, and salt.
    let final_key = Zeroizing::new(random_bytes(rng, key_len));
    let nonce = random_bytes(rng, params.nonce_len);
    let mut salt = [0u8; SALT_LEN];
    rng.fill_bytes(&mut salt);

    // Step 2: choose the slot count m.
    let m = match options.slot_strategy {
        SlotStrategy::Obfuscated => gen_range_inclusive(rng, n, std::cmp::max(8, 2 * n)),
        SlotStrategy::Exact(k) => std::cmp::max(k as u64, n),
        SlotStrategy::None => n,
    };

    // Step 3: wrap the body key once per real recipient.
    let mut taken_tags = std::collections::HashSet::with_capacity(m as usize);
    let mut blocks = Vec::with_capacity(m as usize);
    let mut sessions = Vec::with_capacity(recipients.len());
    for entry in recipients {
        let id_tag = compute_id_tag(suite, &entry.public_key, &salt);
        if !taken_tags.insert(id_tag) {
            return Err(ContainerError::IdTagCollision);
        }
        let (ephemeral_secret, ephemeral_public) = random_kex_keypair(rng);
        let recipient_kex_public = keys::convert_public_to_kex(&entry.public_key)
            .map_err(|_| ContainerError::InvalidRecipientSignature {
                name: entry.name.clone(),
            })?;
        let shared_secret = keys::kex(&ephemeral_secret, &recipient_kex_public);
        let derived_share = derive_share(
            suite,
            shared_secret.as_ref(),
            &recipient_kex_public,
            ephemeral_public.as_bytes(),
        );
        blocks.push(DecryptBlock {
            id_tag,
            ephemeral_public: ephemeral_public.as_bytes().to_vec(),
            pre_key1: xor(&final_key, &derived_share),
        });
        sessions.push(RecipientSession {
            id_tag,
            shared_secret: Zeroizing::new(shared_secret.to_vec()),
            derived_share,
        });
    }

    // Step 4: fill the remaining slots with deception blocks, then order all
    // blocks canonically by id tag.
    let mut deception_left = (m - n) as usize;
    while deception_left > 0 {
        let block = generate_one_deception_block(suite, &salt, options.deception_mode, rng);
        if taken_tags.insert(block.id_tag) {
            blocks.push(block);
            deception_left -= 1;
        }
    }
    blocks.sort_by_key(|block| block.id_tag);

    // Size laws before any serialization: header and encrypted body must fit
    // their u32 length fields.
    let block_len = DecryptBlock::encoded_len(suite) as u64;
    let header_len = HEADER_FIXED_LEN as u64 + params.nonce_len as u64 + m * block_len;
    if header_len > u32::MAX as u64 {
        return Err(ContainerError::LengthMismatch(
            "header exceeds the u32 public length field",
        ));
    }
    let encrypted_body_len = encrypted_body_len(suite, recipients, content.len() as u64)?;
    let plain_body_len = encrypted_body_len - suite.aead_overhead() as u64;

    // Step 5: header with the Private Length placeholder, hashed into the
    // body so recipients can detect header tampering.
    let mut header = PublicHeader {
        version: CONTAINER_VERSION,
        suite_id: suite.id,
        public_length: header_len as u32,
        private_length: 0,
        salt,
        nonce,
        blocks,
    };
    let header_hash = public_header_hash(suite, &header);

    // Steps 6-7: plaintext body, its hash, then encryption.
    let mut body = ByteWriter::with_capacity(plain_body_len as usize);
    body.write_u32le(CONTENT_TYPE_BLOB);
    body.write_bytes(&header_hash);
    body.write_u32le(recipients.len() as u32);
    for entry in recipients {
        body.write_bytes(&entry.public_key);
        body.write_string(&entry.name);
        body.write_bytes(&entry.signature);
    }
    body.write_u32le(content.len() as u32);
    body.write_bytes(content);
    let private_hash = suite.hash(body.as_bytes());
    body.write_bytes(&private_hash);
    let body = Zeroizing::new(body.into_bytes());

    let encrypted_body = suite.aead_encrypt(&final_key, &header.nonce, &body, &[])?;

    // Steps 8-9: real Private Length, then the footer hash over everything.
    header.private_length = encrypted_body.len() as u32;
    let mut hasher = suite.hasher();
    hasher.update(&serialize_header(&header, None));
    hasher.update(&encrypted_body);
    let file_hash = hasher.finalize();

    Ok((
        Container {
            header,
            encrypted_body,
            file_hash,
        },
        SessionKeys {
            final_key,
            recipients: sessions,
        },
    ))
}

/// Encrypted body length `b` for a recipient set and content length: the
/// fixed fields (12 bytes), two hashes, the serialized entries, the content,
/// and the AEAD tag. Errors when `b` would not fit its u32 header field.
pub(crate) fn encrypted_body_len(
    suite: &CipherSuite,
    recipients: &[RecipientEntry],
    content_len: u64,
) -> Result<u64, ContainerError> {
    let entries_len: u64 = recipients.iter().map(|e| e.encoded_len() as u64).sum();
    let total = 12
        + 2 * suite.params.hash_len as u64
        + entries_len
        + content_len
        + suite.aead_overhead() as u64;
    if total > u32::MAX as u64 {
        return Err(ContainerError::ContentTooLarge {
            size: total,
            max: u32::MAX as u64,
        });
    }
    Ok(total)
}

fn validate_recipient_set(
    recipients: &[RecipientEntry],
    allow_duplicate_names: bool,
) -> Result<(), ContainerError> {
    let mut keys_seen = std::collections::HashSet::new();
    let mut names_seen = std::collections::HashSet::new();
    for entry in recipients {
        if !entry.verify() {
            return Err(ContainerError::InvalidRecipientSignature {
                name: entry.name.clone(),
            });
        }
        if !keys_seen.insert(entry.public_key.clone()) {
            return Err(ContainerError::DuplicateRecipientKey {
                name: entry.name.clone(),
            });
        }
        if !allow_duplicate_names && !names_seen.insert(entry.name.clone()) {
            return Err(ContainerError::DuplicateName(entry.name.clone()));
        }
    }
    Ok(())
}
