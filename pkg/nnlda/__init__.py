# nnlda package: LDA, DMR and neural-prior LDA with a shared variational EM engine
