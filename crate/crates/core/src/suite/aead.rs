//! AEAD ciphers used by the registered suites.
//!
//! Both ciphers append a 16-byte authentication tag to the ciphertext, so
//! `ciphertext length = plaintext length + 16` regardless of suite.

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes256Gcm, Nonce};

use super::SuiteError;

/// Authentication tag length shared by both cipher families.
pub const TAG_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeadAlgorithm {
    Aes256Gcm,
    Aegis256,
}

fn check_lengths(alg: AeadAlgorithm, key: &[u8], nonce: &[u8]) -> Result<(), SuiteError> {
    if key.len() != 32 {
        return Err(SuiteError::InvalidKey("AEAD key must be 32 bytes"));
    }
    let expected_nonce = match alg {
        AeadAlgorithm::Aes256Gcm => 12,
        AeadAlgorithm::Aegis256 => 32,
    };
    if nonce.len() != expected_nonce {
        return Err(SuiteError::InvalidKey("AEAD nonce has wrong length"));
    }
    Ok(())
}

pub fn encrypt(
    alg: AeadAlgorithm,
    key: &[u8],
    nonce: &[u8],
    plaintext: &[u8],
    associated_data: &[u8],
) -> Result<Vec<u8>, SuiteError> {
    check_lengths(alg, key, nonce)?;
    match alg {
        AeadAlgorithm::Aes256Gcm => {
            let cipher = Aes256Gcm::new_from_slice(key)
                .map_err(|_| SuiteError::InvalidKey("AEAD key must be 32 bytes"))?;
            cipher
                .encrypt(
                    Nonce::from_slice(nonce),
                    Payload {
                        msg: plaintext,
                        aad: associated_data,
                    },
                )
                .map_err(|_| SuiteError::AeadFailure)
        }
        AeadAlgorithm::Aegis256 => {
            let key: [u8; 32] = key.try_into().expect("length checked");
            let nonce: [u8; 32] = nonce.try_into().expect("length checked");
            let (mut ciphertext, tag) =
                aegis::aegis256::Aegis256::<TAG_LEN>::new(&key, &nonce)
                    .encrypt(plaintext, associated_data);
            ciphertext.extend_from_slice(&tag);
            Ok(ciphertext)
        }
    }
}

pub fn decrypt(
    alg: AeadAlgorithm,
    key: &[u8],
    nonce: &[u8],
    ciphertext: &[u8],
    associated_data: &[u8],
) -> Result<Vec<u8>, SuiteError> {
    check_lengths(alg, key, nonce)?;
    if ciphertext.len() < TAG_LEN {
        return Err(SuiteError::AeadFailure);
    }
    match alg {
        AeadAlgorithm::Aes256Gcm => {
            let cipher = Aes256Gcm::new_from_slice(key)
                .map_err(|_| SuiteError::InvalidKey("AEAD key must be 32 bytes"))?;
            cipher
                .decrypt(
                    Nonce::from_slice(nonce),
                    Payload {
                        msg: ciphertext,
                        aad: associated_data,
                    },
                )
                .map_err(|_| SuiteError::AeadFailure)
        }
        AeadAlgorithm::Aegis256 => {
            let key: [u8; 32] = key.try_into().expect("length checked");
            let nonce: [u8; 32] = nonce.try_into().expect("length checked");
            let split = ciphertext.len() - TAG_LEN;
            let tag: [u8; TAG_LEN] = ciphertext[split..].try_into().expect("tag length");
            aegis::aegis256::Aegis256::<TAG_LEN>::new(&key, &nonce)
                .decrypt(&ciphertext[..split], &tag, associated_data)
                .map_err(|_| SuiteError::AeadFailure)
        }
    }
}
