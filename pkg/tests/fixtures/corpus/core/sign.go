package core

// Signer wraps an RSA-2048 private key.
type Signer struct {
	algorithm string // "ECDSA" or "Ed25519"
}
