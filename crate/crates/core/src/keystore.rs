//! Password-encrypted storage of private keys.
//!
//! Layout, all integers `u32le`:
//!
//! ```text
//! 0        Version
//! 4        Key Type
//! 8        Symmetric Encryption Type
//! 12       KDF Type
//! 16       Salt (16 bytes)
//! 32       Symmetric Nonce (c bytes, cipher-dependent)
//! 32 + c   KDF Config (12 bytes: iterations, memory KiB, parallelism)
//! 44 + c   Encrypted Private Key (32-byte Ed25519 key + 16-byte tag)
//! ```
//!
//! There is no separate integrity hash: every plaintext field is bound as
//! AEAD associated data, so any modification of the header makes decryption
//! fail. Only the Ed25519 private key is stored; all other keys derive from
//! it on load.

use rand_core::{CryptoRng, RngCore};
use thiserror::Error;
use zeroize::Zeroizing;

use crate::codec::{ByteReader, ByteWriter, CodecError};
use crate::container::RecipientEntry;
use crate::suite::aead::{self, AeadAlgorithm, TAG_LEN};
use crate::suite::keys::{PrivateKey, PRIVATE_KEY_LEN};

pub const KEYSTORE_VERSION: u32 = 0x0001_0000;
pub const KEY_TYPE_ED25519: u32 = 0x0000_0001;
pub const SYM_ENC_AES256_GCM: u32 = 0x0000_0001;
pub const SYM_ENC_AEGIS256: u32 = 0x0000_0002;
pub const KDF_ARGON2ID: u32 = 0x0000_0001;

const SALT_LEN: usize = 16;
const KDF_CONFIG_LEN: usize = 12;
const ENCRYPTED_KEY_LEN: usize = PRIVATE_KEY_LEN + TAG_LEN;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeystoreError {
    #[error("keystore file is malformed: {0}")]
    Malformed(CodecError),
    #[error("unsupported keystore version {0:#010x}")]
    UnsupportedVersion(u32),
    #[error("unsupported key type {0:#010x}")]
    UnsupportedKeyType(u32),
    #[error("unsupported symmetric encryption type {0:#010x}")]
    UnsupportedSymEncType(u32),
    #[error("unsupported KDF type {0:#010x}")]
    UnsupportedKdf(u32),
    #[error("KDF parameters out of range")]
    InvalidKdfParams,
    #[error("wrong password or tampered keystore")]
    AuthenticationFailed,
    #[error("password must not be empty")]
    EmptyPassword,
    #[error("invalid recipient name: {0}")]
    InvalidName(&'static str),
}

/// Argon2id cost parameters, stored verbatim in the keystore header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KdfConfig {
    pub iterations: u32,
    pub memory_kib: u32,
    pub parallelism: u32,
}

impl Default for KdfConfig {
    /// 3 iterations over 64 MiB with 4 lanes.
    fn default() -> Self {
        Self {
            iterations: 3,
            memory_kib: 64 * 1024,
            parallelism: 4,
        }
    }
}

impl KdfConfig {
    /// Operational bounds. The ceilings reject absurd configurations, e.g.
    /// from a corrupted header, before any derivation work is attempted.
    pub const MAX_ITERATIONS: u32 = 4096;
    pub const MAX_MEMORY_KIB: u32 = 4 * 1024 * 1024;
    pub const MAX_PARALLELISM: u32 = 64;

    pub fn validate(&self) -> Result<(), KeystoreError> {
        let in_range = (1..=Self::MAX_ITERATIONS).contains(&self.iterations)
            && (1..=Self::MAX_MEMORY_KIB).contains(&self.memory_kib)
            && (1..=Self::MAX_PARALLELISM).contains(&self.parallelism);
        if in_range {
            Ok(())
        } else {
            Err(KeystoreError::InvalidKdfParams)
        }
    }
}

/// Symmetric cipher protecting the stored key. Independent of any
/// container's cipher suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeystoreCipher {
    Aes256Gcm,
    Aegis256,
}

impl KeystoreCipher {
    pub fn id(self) -> u32 {
        match self {
            KeystoreCipher::Aes256Gcm => SYM_ENC_AES256_GCM,
            KeystoreCipher::Aegis256 => SYM_ENC_AEGIS256,
        }
    }

    pub fn nonce_len(self) -> usize {
        match self {
            KeystoreCipher::Aes256Gcm => 12,
            KeystoreCipher::Aegis256 => 32,
        }
    }

    fn algorithm(self) -> AeadAlgorithm {
        match self {
            KeystoreCipher::Aes256Gcm => AeadAlgorithm::Aes256Gcm,
            KeystoreCipher::Aegis256 => AeadAlgorithm::Aegis256,
        }
    }

    fn from_id(id: u32) -> Result<Self, KeystoreError> {
        match id {
            SYM_ENC_AES256_GCM => Ok(KeystoreCipher::Aes256Gcm),
            SYM_ENC_AEGIS256 => Ok(KeystoreCipher::Aegis256),
            _ => Err(KeystoreError::UnsupportedSymEncType(id)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeystoreOptions {
    pub kdf: KdfConfig,
    pub cipher: KeystoreCipher,
}

impl Default for KeystoreOptions {
    fn default() -> Self {
        Self {
            kdf: KdfConfig::default(),
            cipher: KeystoreCipher::Aes256Gcm,
        }
    }
}

/// Generates a fresh signing key pair.
pub fn generate_keypair(rng: &mut (impl RngCore + CryptoRng)) -> PrivateKey {
    PrivateKey::generate(rng)
}

fn derive_key(
    password: &str,
    salt: &[u8; SALT_LEN],
    config: &KdfConfig,
) -> Result<Zeroizing<[u8; 32]>, KeystoreError> {
    let params = argon2::Params::new(
        config.memory_kib,
        config.iterations,
        config.parallelism,
        Some(32),
    )
    .map_err(|_| KeystoreError::InvalidKdfParams)?;
    let argon = argon2::Argon2::new(argon2::Algorithm::Argon2id, argon2::Version::V0x13, params);
    let mut key = Zeroizing::new([0u8; 32]);
    argon
        .hash_password_into(password.as_bytes(), salt, key.as_mut())
        .map_err(|_| KeystoreError::InvalidKdfParams)?;
    Ok(key)
}

/// Encrypts a private key under a password and serializes the keystore file.
pub fn save_key(
    key: &PrivateKey,
    password: &str,
    options: &KeystoreOptions,
    rng: &mut (impl RngCore + CryptoRng),
) -> Result<Vec<u8>, KeystoreError> {
    if password.is_empty() {
        return Err(KeystoreError::EmptyPassword);
    }
    options.kdf.validate()?;

    let mut salt = [0u8; SALT_LEN];
    rng.fill_bytes(&mut salt);
    let mut nonce = vec![0u8; options.cipher.nonce_len()];
    rng.fill_bytes(&mut nonce);

    let mut writer =
        ByteWriter::with_capacity(32 + nonce.len() + KDF_CONFIG_LEN + ENCRYPTED_KEY_LEN);
    writer.write_u32le(KEYSTORE_VERSION);
    writer.write_u32le(KEY_TYPE_ED25519);
    writer.write_u32le(options.cipher.id());
    writer.write_u32le(KDF_ARGON2ID);
    writer.write_bytes(&salt);
    writer.write_bytes(&nonce);
    writer.write_u32le(options.kdf.iterations);
    writer.write_u32le(options.kdf.memory_kib);
    writer.write_u32le(options.kdf.parallelism);

    let derived = derive_key(password, &salt, &options.kdf)?;
    let seed = key.to_bytes();
    let encrypted = aead::encrypt(
        options.cipher.algorithm(),
        derived.as_ref(),
        &nonce,
        seed.as_ref(),
        writer.as_bytes(),
    )
    .map_err(|_| KeystoreError::AuthenticationFailed)?;
    writer.write_bytes(&encrypted);
    Ok(writer.into_bytes())
}

/// Decrypts a keystore file with the given password.
///
/// Wrong passwords and any modification of the file are indistinguishable by
/// construction; both surface as [`KeystoreError::AuthenticationFailed`].
pub fn load_key(bytes: &[u8], password: &str) -> Result<PrivateKey, KeystoreError> {
    let mut reader = ByteReader::new(bytes);
    let version = reader.read_u32le().map_err(KeystoreError::Malformed)?;
    if version != KEYSTORE_VERSION {
        return Err(KeystoreError::UnsupportedVersion(version));
    }
    let key_type = reader.read_u32le().map_err(KeystoreError::Malformed)?;
    if key_type != KEY_TYPE_ED25519 {
        return Err(KeystoreError::UnsupportedKeyType(key_type));
    }
    let cipher = KeystoreCipher::from_id(reader.read_u32le().map_err(KeystoreError::Malformed)?)?;
    let kdf_type = reader.read_u32le().map_err(KeystoreError::Malformed)?;
    if kdf_type != KDF_ARGON2ID {
        return Err(KeystoreError::UnsupportedKdf(kdf_type));
    }

    let salt: [u8; SALT_LEN] = reader.read_array().map_err(KeystoreError::Malformed)?;
    let nonce = reader
        .read_bytes(cipher.nonce_len())
        .map_err(KeystoreError::Malformed)?
        .to_vec();
    let config = KdfConfig {
        iterations: reader.read_u32le().map_err(KeystoreError::Malformed)?,
        memory_kib: reader.read_u32le().map_err(KeystoreError::Malformed)?,
        parallelism: reader.read_u32le().map_err(KeystoreError::Malformed)?,
    };
    config.validate()?;

    let associated_data = &bytes[..reader.position()];
    let encrypted = reader
        .read_bytes(ENCRYPTED_KEY_LEN)
        .map_err(KeystoreError::Malformed)?;
    reader.expect_end().map_err(KeystoreError::Malformed)?;

    let derived = derive_key(password, &salt, &config)?;
    let seed = Zeroizing::new(
        aead::decrypt(
            cipher.algorithm(),
            derived.as_ref(),
            &nonce,
            encrypted,
            associated_data,
        )
        .map_err(|_| KeystoreError::AuthenticationFailed)?,
    );
    PrivateKey::from_bytes(&seed).map_err(|_| KeystoreError::AuthenticationFailed)
}

/// Builds this key's recipient entry: public key, self-chosen name, and the
/// signature over the raw UTF-8 name bytes. The entry is self-verifying and
/// safe to pass around; authenticity is checked by comparing fingerprints
/// over a second channel.
pub fn export_recipient_entry(
    key: &PrivateKey,
    name: &str,
) -> Result<RecipientEntry, KeystoreError> {
    if name.is_empty() {
        return Err(KeystoreError::InvalidName("name must not be empty"));
    }
    if name.starts_with('\u{FEFF}') {
        return Err(KeystoreError::InvalidName(
            "name must not start with a byte order mark",
        ));
    }
    Ok(RecipientEntry {
        public_key: key.public_key_bytes().to_vec(),
        name: name.to_owned(),
        signature: key.sign(name.as_bytes()).to_vec(),
    })
}
