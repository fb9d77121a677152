//! Ed25519 signing keys and their X25519 key-exchange counterparts.
//!
//! All registered suites store a single Ed25519 key per user and derive the
//! X25519 keys from it: the public key maps through the Edwards-to-Montgomery
//! birational equivalence, the private key is the clamped first half of the
//! SHA-512 seed expansion. Only the Ed25519 private key ever needs to be
//! persisted.

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use rand_core::{CryptoRng, RngCore};
use x25519_dalek::{PublicKey as KexPublicKey, StaticSecret};
use zeroize::Zeroizing;

use super::SuiteError;

pub const PUBLIC_KEY_LEN: usize = 32;
pub const PRIVATE_KEY_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;
pub const SHARED_SECRET_LEN: usize = 32;

/// A user's long-term Ed25519 signing key.
///
/// The wrapped key material is zeroized on drop. X25519 counterparts are
/// derived on demand and never stored.
#[derive(Clone)]
pub struct PrivateKey {
    signing: SigningKey,
}

impl std::fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrivateKey")
            .field("public_key", &hex::encode(self.public_key_bytes()))
            .finish_non_exhaustive()
    }
}

impl PrivateKey {
    /// Generates a fresh signing key from the given randomness source.
    pub fn generate(rng: &mut (impl RngCore + CryptoRng)) -> Self {
        let mut seed = Zeroizing::new([0u8; PRIVATE_KEY_LEN]);
        rng.fill_bytes(seed.as_mut());
        Self {
            signing: SigningKey::from_bytes(&seed),
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SuiteError> {
        let seed: [u8; PRIVATE_KEY_LEN] = bytes
            .try_into()
            .map_err(|_| SuiteError::InvalidKey("private key must be 32 bytes"))?;
        Ok(Self {
            signing: SigningKey::from_bytes(&seed),
        })
    }

    pub fn to_bytes(&self) -> Zeroizing<[u8; PRIVATE_KEY_LEN]> {
        Zeroizing::new(self.signing.to_bytes())
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.signing.verifying_key()
    }

    pub fn public_key_bytes(&self) -> [u8; PUBLIC_KEY_LEN] {
        self.signing.verifying_key().to_bytes()
    }

    pub fn sign(&self, message: &[u8]) -> [u8; SIGNATURE_LEN] {
        self.signing.sign(message).to_bytes()
    }

    /// Converts the signing key into its X25519 counterpart.
    pub fn kex_secret(&self) -> StaticSecret {
        StaticSecret::from(self.signing.to_scalar_bytes())
    }

    /// X25519 public key belonging to [`Self::kex_secret`]. Equals the
    /// conversion of the Ed25519 public key.
    pub fn kex_public(&self) -> KexPublicKey {
        KexPublicKey::from(&self.kex_secret())
    }
}

/// Parses an Ed25519 public key, rejecting malformed or non-decodable points.
pub fn parse_public_key(bytes: &[u8]) -> Result<VerifyingKey, SuiteError> {
    let bytes: [u8; PUBLIC_KEY_LEN] = bytes
        .try_into()
        .map_err(|_| SuiteError::InvalidKey("public key must be 32 bytes"))?;
    VerifyingKey::from_bytes(&bytes)
        .map_err(|_| SuiteError::InvalidKey("public key is not a valid curve point"))
}

/// Converts an Ed25519 public key to the corresponding X25519 public key.
pub fn convert_public_to_kex(bytes: &[u8]) -> Result<KexPublicKey, SuiteError> {
    let verifying = parse_public_key(bytes)?;
    Ok(KexPublicKey::from(verifying.to_montgomery().to_bytes()))
}

/// Verifies an Ed25519 signature. Malformed keys or signatures verify as
/// false rather than erroring.
pub fn verify_signature(public_key: &[u8], message: &[u8], signature: &[u8]) -> bool {
    let Ok(verifying) = parse_public_key(public_key) else {
        return false;
    };
    let Ok(sig_bytes): Result<[u8; SIGNATURE_LEN], _> = signature.try_into() else {
        return false;
    };
    verifying
        .verify(message, &Signature::from_bytes(&sig_bytes))
        .is_ok()
}

/// X25519 key exchange. Symmetric in its arguments:
/// `kex(sk_a, pk_b) == kex(sk_b, pk_a)`.
pub fn kex(secret: &StaticSecret, public: &KexPublicKey) -> Zeroizing<[u8; SHARED_SECRET_LEN]> {
    Zeroizing::new(secret.diffie_hellman(public).to_bytes())
}

/// Parses an X25519 public key from raw bytes. Any 32-byte string is a valid
/// Montgomery u-coordinate.
pub fn parse_kex_public(bytes: &[u8]) -> Result<KexPublicKey, SuiteError> {
    let bytes: [u8; PUBLIC_KEY_LEN] = bytes
        .try_into()
        .map_err(|_| SuiteError::InvalidKey("key exchange public key must be 32 bytes"))?;
    Ok(KexPublicKey::from(bytes))
}
