use digest::Digest;

pub fn derive(key: &[u8]) -> Vec<u8> {
    let cipher = Aes::new(key.into());
    Sha3_256::digest(cipher.encrypt(key)).to_vec()
}
