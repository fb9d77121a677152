//! Recipient-set and content mutation.
//!
//! Every mutation decrypts the container and re-encrypts it from scratch:
//! fresh body key, salt, nonce, and ephemeral keys. There is no in-place
//! update. Former recipients keep access to old versions of a file, which is
//! unpreventable; rotating the stored secrets is the remedy.

use rand_core::{CryptoRng, RngCore};

use crate::suite::keys::PrivateKey;

use super::decrypt::{decrypt, DecryptOptions};
use super::encrypt::{encrypt, EncryptOptions};
use super::{Container, ContainerError, RecipientEntry};

/// Identifies one recipient for removal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecipientSelector {
    /// Match on the signing public key.
    ByPublicKey(Vec<u8>),
    /// Match on the self-chosen name; ambiguous when duplicate names were
    /// allowed into the set.
    ByName(String),
}

/// Adds a recipient to a container the caller can decrypt.
///
/// The entry's name signature is verified before anything is decrypted. The
/// updated container is fully re-encrypted, so the new recipient can only
/// read versions from this point on.
pub fn add_recipient(
    key: &PrivateKey,
    container: &Container,
    entry: &RecipientEntry,
    encrypt_options: &EncryptOptions,
    decrypt_options: &DecryptOptions,
    rng: &mut (impl RngCore + CryptoRng),
) -> Result<Container, ContainerError> {
    if !entry.verify() {
        return Err(ContainerError::InvalidRecipientSignature {
            name: entry.name.clone(),
        });
    }
    let suite = container.suite()?;
    let opened = decrypt(key, container, decrypt_options)?;

    if opened
        .recipients
        .iter()
        .any(|r| r.public_key == entry.public_key)
    {
        return Err(ContainerError::AlreadyRecipient);
    }
    if !encrypt_options.allow_duplicate_names
        && opened.recipients.iter().any(|r| r.name == entry.name)
    {
        return Err(ContainerError::DuplicateName(entry.name.clone()));
    }

    let mut recipients = opened.recipients;
    recipients.push(entry.clone());
    encrypt(suite, &recipients, &opened.content, encrypt_options, rng)
}

/// Removes one recipient from a container the caller can decrypt.
///
/// The selector must match exactly one entry. Self-removal is refused unless
/// explicitly allowed, since a container with no recipients is unreadable.
pub fn remove_recipient(
    key: &PrivateKey,
    container: &Container,
    selector: &RecipientSelector,
    allow_self_removal: bool,
    encrypt_options: &EncryptOptions,
    decrypt_options: &DecryptOptions,
    rng: &mut (impl RngCore + CryptoRng),
) -> Result<Container, ContainerError> {
    let suite = container.suite()?;
    let opened = decrypt(key, container, decrypt_options)?;

    let matches: Vec<usize> = opened
        .recipients
        .iter()
        .enumerate()
        .filter(|(_, r)| match selector {
            RecipientSelector::ByPublicKey(pk) => &r.public_key == pk,
            RecipientSelector::ByName(name) => &r.name == name,
        })
        .map(|(i, _)| i)
        .collect();

    let index = match matches.as_slice() {
        [] => return Err(ContainerError::RecipientNotFound),
        [index] => *index,
        _ => match selector {
            RecipientSelector::ByName(name) => {
                return Err(ContainerError::AmbiguousName(name.clone()))
            }
            // Duplicate public keys cannot enter a container.
            RecipientSelector::ByPublicKey(_) => return Err(ContainerError::RecipientNotFound),
        },
    };

    if !allow_self_removal
        && opened.recipients[index].public_key == key.public_key_bytes().as_slice()
    {
        return Err(ContainerError::SelfRemovalForbidden);
    }

    let mut recipients = opened.recipients;
    recipients.remove(index);
    encrypt(suite, &recipients, &opened.content, encrypt_options, rng)
}

/// Replaces the content of a container the caller can decrypt, keeping the
/// recipient set unchanged.
pub fn set_content(
    key: &PrivateKey,
    container: &Container,
    new_content: &[u8],
    encrypt_options: &EncryptOptions,
    decrypt_options: &DecryptOptions,
    rng: &mut (impl RngCore + CryptoRng),
) -> Result<Container, ContainerError> {
    let suite = container.suite()?;
    let opened = decrypt(key, container, decrypt_options)?;
    encrypt(suite, &opened.recipients, new_content, encrypt_options, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::{lookup_suite, SUITE_AES256GCM_SHA512};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct User {
        key: PrivateKey,
        entry: RecipientEntry,
    }

    fn user(rng: &mut ChaCha20Rng, name: &str) -> User {
        let key = PrivateKey::generate(rng);
        let entry = RecipientEntry {
            public_key: key.public_key_bytes().to_vec(),
            name: name.to_owned(),
            signature: key.sign(name.as_bytes()).to_vec(),
        };
        User { key, entry }
    }

    fn opts() -> (EncryptOptions, DecryptOptions) {
        (EncryptOptions::default(), DecryptOptions::default())
    }

    #[test]
    fn add_then_new_recipient_reads() {
        let mut rng = ChaCha20Rng::seed_from_u64(40);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let bob = user(&mut rng, "bob");
        let (enc, dec) = opts();

        let container = encrypt(suite, std::slice::from_ref(&alice.entry), b"v1", &enc, &mut rng).unwrap();
        assert_eq!(
            decrypt(&bob.key, &container, &dec).unwrap_err(),
            ContainerError::NotARecipient
        );

        let updated =
            add_recipient(&alice.key, &container, &bob.entry, &enc, &dec, &mut rng).unwrap();
        let opened = decrypt(&bob.key, &updated, &dec).unwrap();
        assert_eq!(opened.content, b"v1");
        assert_eq!(opened.recipients.len(), 2);
    }

    #[test]
    fn add_same_key_twice_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let bob = user(&mut rng, "bob");
        let (enc, dec) = opts();

        let container = encrypt(suite, std::slice::from_ref(&alice.entry), b"", &enc, &mut rng).unwrap();
        let updated =
            add_recipient(&alice.key, &container, &bob.entry, &enc, &dec, &mut rng).unwrap();
        assert_eq!(
            add_recipient(&alice.key, &updated, &bob.entry, &enc, &dec, &mut rng).unwrap_err(),
            ContainerError::AlreadyRecipient
        );
    }

    #[test]
    fn duplicate_name_policy_on_add() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let impostor = user(&mut rng, "alice");
        let (enc, dec) = opts();

        let container = encrypt(suite, std::slice::from_ref(&alice.entry), b"", &enc, &mut rng).unwrap();
        assert_eq!(
            add_recipient(&alice.key, &container, &impostor.entry, &enc, &dec, &mut rng)
                .unwrap_err(),
            ContainerError::DuplicateName("alice".into())
        );

        let relaxed = EncryptOptions {
            allow_duplicate_names: true,
            ..enc
        };
        let updated =
            add_recipient(&alice.key, &container, &impostor.entry, &relaxed, &dec, &mut rng)
                .unwrap();
        assert_eq!(decrypt(&impostor.key, &updated, &dec).unwrap().content, b"");
    }

    #[test]
    fn add_rejects_bad_entry_before_decrypting() {
        let mut rng = ChaCha20Rng::seed_from_u64(43);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let mut forged = user(&mut rng, "bob").entry;
        forged.name = "mallory".into();
        let (enc, dec) = opts();

        let container = encrypt(suite, std::slice::from_ref(&alice.entry), b"", &enc, &mut rng).unwrap();
        assert!(matches!(
            add_recipient(&alice.key, &container, &forged, &enc, &dec, &mut rng).unwrap_err(),
            ContainerError::InvalidRecipientSignature { .. }
        ));
    }

    #[test]
    fn removed_recipient_loses_access_to_new_file_only() {
        let mut rng = ChaCha20Rng::seed_from_u64(44);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let bob = user(&mut rng, "bob");
        let (enc, dec) = opts();

        let v1 = encrypt(
            suite,
            &[alice.entry.clone(), bob.entry.clone()],
            b"old",
            &enc,
            &mut rng,
        )
        .unwrap();
        let v2 = remove_recipient(
            &alice.key,
            &v1,
            &RecipientSelector::ByName("bob".into()),
            false,
            &enc,
            &dec,
            &mut rng,
        )
        .unwrap();

        assert_eq!(
            decrypt(&bob.key, &v2, &dec).unwrap_err(),
            ContainerError::NotARecipient
        );
        // The archived version still opens for Bob.
        assert_eq!(decrypt(&bob.key, &v1, &dec).unwrap().content, b"old");
        assert_eq!(decrypt(&alice.key, &v2, &dec).unwrap().recipients.len(), 1);
    }

    #[test]
    fn remove_by_public_key() {
        let mut rng = ChaCha20Rng::seed_from_u64(45);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let bob = user(&mut rng, "bob");
        let (enc, dec) = opts();

        let container = encrypt(
            suite,
            &[alice.entry.clone(), bob.entry.clone()],
            b"",
            &enc,
            &mut rng,
        )
        .unwrap();
        let updated = remove_recipient(
            &alice.key,
            &container,
            &RecipientSelector::ByPublicKey(bob.entry.public_key.clone()),
            false,
            &enc,
            &dec,
            &mut rng,
        )
        .unwrap();
        assert_eq!(
            decrypt(&bob.key, &updated, &dec).unwrap_err(),
            ContainerError::NotARecipient
        );
    }

    #[test]
    fn remove_unknown_and_self() {
        let mut rng = ChaCha20Rng::seed_from_u64(46);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let bob = user(&mut rng, "bob");
        let (enc, dec) = opts();

        let container = encrypt(
            suite,
            &[alice.entry.clone(), bob.entry.clone()],
            b"",
            &enc,
            &mut rng,
        )
        .unwrap();
        assert_eq!(
            remove_recipient(
                &alice.key,
                &container,
                &RecipientSelector::ByName("charlie".into()),
                false,
                &enc,
                &dec,
                &mut rng,
            )
            .unwrap_err(),
            ContainerError::RecipientNotFound
        );
        assert_eq!(
            remove_recipient(
                &alice.key,
                &container,
                &RecipientSelector::ByName("alice".into()),
                false,
                &enc,
                &dec,
                &mut rng,
            )
            .unwrap_err(),
            ContainerError::SelfRemovalForbidden
        );
        // Explicitly allowed self-removal works as long as someone remains.
        let solo = remove_recipient(
            &alice.key,
            &container,
            &RecipientSelector::ByName("alice".into()),
            true,
            &enc,
            &dec,
            &mut rng,
        )
        .unwrap();
        assert_eq!(
            decrypt(&alice.key, &solo, &dec).unwrap_err(),
            ContainerError::NotARecipient
        );
        assert!(decrypt(&bob.key, &solo, &dec).is_ok());
    }

    #[test]
    fn ambiguous_name_needs_key_selector() {
        let mut rng = ChaCha20Rng::seed_from_u64(47);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let twin_a = user(&mut rng, "twin");
        let twin_b = user(&mut rng, "twin");
        let enc = EncryptOptions {
            allow_duplicate_names: true,
            ..Default::default()
        };
        let dec = DecryptOptions::default();

        let container = encrypt(
            suite,
            &[alice.entry.clone(), twin_a.entry.clone(), twin_b.entry.clone()],
            b"",
            &enc,
            &mut rng,
        )
        .unwrap();
        assert_eq!(
            remove_recipient(
                &alice.key,
                &container,
                &RecipientSelector::ByName("twin".into()),
                false,
                &enc,
                &dec,
                &mut rng,
            )
            .unwrap_err(),
            ContainerError::AmbiguousName("twin".into())
        );
        // Unambiguous by key.
        assert!(remove_recipient(
            &alice.key,
            &container,
            &RecipientSelector::ByPublicKey(twin_a.entry.public_key.clone()),
            false,
            &enc,
            &dec,
            &mut rng,
        )
        .is_ok());
    }

    #[test]
    fn set_content_keeps_recipients() {
        let mut rng = ChaCha20Rng::seed_from_u64(48);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let charlie = user(&mut rng, "charlie");
        let (enc, dec) = opts();

        let v1 = encrypt(
            suite,
            &[alice.entry.clone(), charlie.entry.clone()],
            b"old certificate",
            &enc,
            &mut rng,
        )
        .unwrap();
        let v2 = set_content(&charlie.key, &v1, b"renewed certificate", &enc, &dec, &mut rng)
            .unwrap();

        let opened_v1 = decrypt(&alice.key, &v1, &dec).unwrap();
        let opened_v2 = decrypt(&alice.key, &v2, &dec).unwrap();
        assert_eq!(opened_v2.content, b"renewed certificate");
        assert_eq!(opened_v1.recipients, opened_v2.recipients);
    }

    #[test]
    fn outsider_cannot_edit() {
        let mut rng = ChaCha20Rng::seed_from_u64(49);
        let suite = lookup_suite(SUITE_AES256GCM_SHA512).unwrap();
        let alice = user(&mut rng, "alice");
        let eve = user(&mut rng, "eve");
        let (enc, dec) = opts();

        let container = encrypt(suite, std::slice::from_ref(&alice.entry), b"", &enc, &mut rng).unwrap();
        assert_eq!(
            set_content(&eve.key, &container, b"hijack", &enc, &dec, &mut rng).unwrap_err(),
            ContainerError::NotARecipient
        );
        assert_eq!(
            add_recipient(&eve.key, &container, &eve.entry, &enc, &dec, &mut rng).unwrap_err(),
            ContainerError::NotARecipient
        );
    }
}
