//! Hybrid-encrypted, multi-recipient container files for confidential data
//! in version-controlled repositories.
//!
//! A container holds one encrypted payload readable by a set of recipients,
//! each identified by an Ed25519 key pair. The bulk data is encrypted once
//! under a fresh symmetric key; that key is wrapped per recipient via an
//! ephemeral X25519 exchange against the converted signing key. The public
//! header reveals only an obfuscated upper bound on the number of
//! recipients; names and public keys live inside the encrypted body, which
//! also makes the recipient set available for re-encryption whenever it or
//! the content changes.
//!
//! Modules:
//! - [`codec`]: little-endian primitives shared by all on-disk structures
//! - [`suite`]: cipher-suite registry and algorithm contracts
//! - [`keystore`]: password-encrypted private key files
//! - [`container`]: the container format and its operations

pub mod codec;
pub mod container;
pub mod keystore;
pub mod suite;

pub use container::{
    add_recipient, compute_id_tag, decrypt, encrypt, encrypt_traced, fingerprint,
    generate_deception_blocks, parse, remove_recipient, serialize, set_content, Container,
    ContainerError, DeceptionMode, Decrypted, DecryptBlock, DecryptOptions, EncryptOptions,
    PublicHeader, RecipientEntry, RecipientSelector, RecipientSession, SessionKeys, SlotStrategy,
    CONTAINER_VERSION, CONTENT_TYPE_BLOB,
};
pub use keystore::{
    export_recipient_entry, generate_keypair, load_key, save_key, KdfConfig, KeystoreCipher,
    KeystoreError, KeystoreOptions,
};
pub use suite::keys::PrivateKey;
pub use suite::{
    lookup_suite, CipherSuite, SuiteError, SUITES, SUITE_AEGIS256_SHA256, SUITE_AEGIS256_SHA512,
    SUITE_AES256GCM_SHA256, SUITE_AES256GCM_SHA512,
};
