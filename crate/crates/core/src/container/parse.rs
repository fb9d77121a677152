//! Bit-exact serialization and parsing of the container layout.
//!
//! Layout, all integers `u32le`:
//!
//! ```text
//! 0        Container Version
//! 4        Cipher Suite
//! 8        Public Length h
//! 12       Private Length b
//! 16       Recipient Count m
//! 20       Salt (16 bytes)
//! 36       Symmetric Nonce (c bytes)
//! 36 + c   m decrypt blocks of 16 + a + y bytes each; block i starts at
//!          o_i = 36 + c + i * (16 + a + y), and o_m must equal h
//! h        encrypted private body (b bytes)
//! h + b    file hash (d bytes); total file length is h + b + d
//! ```

use crate::codec::{ByteReader, ByteWriter};
use crate::suite::{lookup_suite, CipherSuite};

use super::{
    Container, ContainerError, DecryptBlock, PublicHeader, CONTAINER_VERSION, HEADER_FIXED_LEN,
    ID_TAG_LEN, PRIVATE_LENGTH_PLACEHOLDER, SALT_LEN,
};

/// Serializes the public header. `private_length_override` substitutes the
/// Private Length field, which the header-hash computation fixes to
/// [`PRIVATE_LENGTH_PLACEHOLDER`](super::PRIVATE_LENGTH_PLACEHOLDER).
pub(crate) fn serialize_header(header: &PublicHeader, private_length_override: Option<u32>) -> Vec<u8> {
    let mut writer = ByteWriter::with_capacity(header.public_length as usize);
    writer.write_u32le(header.version);
    writer.write_u32le(header.suite_id);
    writer.write_u32le(header.public_length);
    writer.write_u32le(private_length_override.unwrap_or(header.private_length));
    writer.write_u32le(header.slot_count());
    writer.write_bytes(&header.salt);
    writer.write_bytes(&header.nonce);
    for block in &header.blocks {
        writer.write_bytes(&block.id_tag);
        writer.write_bytes(&block.ephemeral_public);
        writer.write_bytes(&block.pre_key1);
    }
    writer.into_bytes()
}

/// Hash of the header with the Private Length field set to the placeholder,
/// as stored in (and checked against) the encrypted body.
pub(crate) fn public_header_hash(suite: &CipherSuite, header: &PublicHeader) -> Vec<u8> {
    suite.hash(&serialize_header(header, Some(PRIVATE_LENGTH_PLACEHOLDER)))
}

/// Serializes a container to its on-disk byte representation.
pub fn serialize(container: &Container) -> Vec<u8> {
    let header = serialize_header(&container.header, None);
    let mut out = Vec::with_capacity(
        header.len() + container.encrypted_body.len() + container.file_hash.len(),
    );
    out.extend_from_slice(&header);
    out.extend_from_slice(&container.encrypted_body);
    out.extend_from_slice(&container.file_hash);
    out
}

/// Parses and structurally validates a container.
///
/// Enforces the version, a known cipher suite, the header length law
/// `h = 36 + c + m * (16 + a + y)` (equivalently `o_m = h`), and the total
/// length law `h + b + d`. Integrity of the contents is checked during
/// decryption, not here.
pub fn parse(bytes: &[u8]) -> Result<Container, ContainerError> {
    if bytes.len() < HEADER_FIXED_LEN {
        return Err(ContainerError::TruncatedFile {
            need: HEADER_FIXED_LEN,
            have: bytes.len(),
        });
    }

    let mut reader = ByteReader::new(bytes);
    let version = reader.read_u32le().expect("length checked");
    if version != CONTAINER_VERSION {
        return Err(ContainerError::BadMagicVersion(version));
    }
    let suite_id = reader.read_u32le().expect("length checked");
    let suite = lookup_suite(suite_id).map_err(|_| ContainerError::UnsupportedSuite(suite_id))?;
    let public_length = reader.read_u32le().expect("length checked");
    let private_length = reader.read_u32le().expect("length checked");
    let slot_count = reader.read_u32le().expect("length checked");

    let params = suite.params;
    let block_len = ID_TAG_LEN + params.kex_public_len + params.symmetric_key_len;
    let expected_header =
        HEADER_FIXED_LEN as u64 + params.nonce_len as u64 + slot_count as u64 * block_len as u64;
    if expected_header != public_length as u64 {
        return Err(ContainerError::LengthMismatch(
            "public length does not match 36 + c + m * (16 + a + y)",
        ));
    }
    if (private_length as usize) < suite.aead_overhead() {
        return Err(ContainerError::LengthMismatch(
            "private length is below the AEAD overhead",
        ));
    }

    let total = public_length as u64 + private_length as u64 + params.hash_len as u64;
    if (bytes.len() as u64) < total {
        return Err(ContainerError::TruncatedFile {
            need: total as usize,
            have: bytes.len(),
        });
    }
    if bytes.len() as u64 != total {
        return Err(ContainerError::LengthMismatch(
            "file length does not match h + b + d",
        ));
    }

    let salt: [u8; SALT_LEN] = reader.read_array().expect("length checked");
    let nonce = reader
        .read_bytes(params.nonce_len)
        .expect("length checked")
        .to_vec();

    let mut blocks = Vec::with_capacity(slot_count as usize);
    for _ in 0..slot_count {
        let id_tag: [u8; ID_TAG_LEN] = reader.read_array().expect("length checked");
        let ephemeral_public = reader
            .read_bytes(params.kex_public_len)
            .expect("length checked")
            .to_vec();
        let pre_key1 = reader
            .read_bytes(params.symmetric_key_len)
            .expect("length checked")
            .to_vec();
        blocks.push(DecryptBlock {
            id_tag,
            ephemeral_public,
            pre_key1,
        });
    }
    debug_assert_eq!(reader.position(), public_length as usize);

    let encrypted_body = reader
        .read_bytes(private_length as usize)
        .expect("length checked")
        .to_vec();
    let file_hash = reader
        .read_bytes(params.hash_len)
        .expect("length checked")
        .to_vec();

    Ok(Container {
        header: PublicHeader {
            version,
            suite_id,
            public_length,
            private_length,
            salt,
            nonce,
            blocks,
        },
        encrypted_body,
        file_hash,
    })
}
