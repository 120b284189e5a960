import numpy as np


class Adam:
    '''Adaptive moment estimation over a dict of parameter tensors.

    Parameters
    ----------
    params : dict of str to Tensor
    lr : float, default: 1e-3
    betas : 2-tuple, default: (0.9, 0.999)
    eps : float, default: 1e-8
    '''
    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.params = params
        self.lr = lr
        self.betas = tuple(betas)
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in params.items()}


    def zero_grad(self):
        for p in self.params.values():
            p.grad = None


    def step(self):
        '''One update from the accumulated gradients; parameters without a gradient are left untouched.
        '''
        self.t += 1
        b1, b2 = self.betas
        for name, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1 ** self.t)
            v_hat = self.v[name] / (1 - b2 ** self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


    def state_dict(self):
        state = {'t': self.t, 'lr': self.lr, 'betas': list(self.betas), 'eps': self.eps}
        state.update({'m/' + k: v for k, v in self.m.items()})
        state.update({'v/' + k: v for k, v in self.v.items()})
        return state


    def load_state_dict(self, state):
        self.t = int(state['t'])
        self.lr = float(state['lr'])
        self.betas = tuple(float(b) for b in state['betas'])
        self.eps = float(state['eps'])
        for name in self.params:
            self.m[name] = np.array(state['m/' + name], dtype=np.float64)
            self.v[name] = np.array(state['v/' + name], dtype=np.float64)
